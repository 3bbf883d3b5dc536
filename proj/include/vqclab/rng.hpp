// Copyright 2026 The vqclab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace vqclab {

/// What a stream is used for. Distinct purposes never share draws.
enum class StreamPurpose : std::uint64_t {
    Split = 1,
    Init = 2,
    Shuffle = 3,
    Diffusion = 4,
    Evaluation = 5,
    Test = 99,
};

/// SplitMix64 finalizer; used only to derive well-separated engine seeds.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Folds a base seed and a path of integers (cell, repeat, ...) into one seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(base);
    for (auto p : path) {
        h = mix64(h ^ mix64(p));
    }
    return h;
}

/// A single reproducible random stream (mt19937_64 underneath).
///
/// Distribution objects that cache state (the normal sampler keeps a spare
/// variate) live inside the stream, so a sequence of draws depends only on the
/// seed and the order of calls.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    RngStream(std::uint64_t base, StreamPurpose purpose, std::initializer_list<std::uint64_t> path = {})
        : engine_(derive_seed(mix64(base) ^ static_cast<std::uint64_t>(purpose), path)) {}

    double normal() { return normal_(engine_); }
    double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

    /// Beta(a, b) via the ratio of two gamma variates.
    double beta(double a, double b) {
        for (;;) {
            const double x = gamma(a);
            const double y = gamma(b);
            if (x + y > 0.0) {
                return x / (x + y);
            }
        }
    }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace vqclab
