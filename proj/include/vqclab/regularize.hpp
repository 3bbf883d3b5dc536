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

// Parameter regularization:
//  - data-informed initialization: distribution hyperparameters fitted to the
//    encoded training features, plus the usual data-free initializers;
//  - Gaussian noise diffusion, theta <- sqrt(G) theta + sqrt(1 - G) eps, with G
//    the running product of a linearly decreasing per-step keep rate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vqclab/ansatz.hpp"
#include "vqclab/rng.hpp"

namespace vqclab {

// ---------------------------------------------------------------------------
// Priors

struct PriorStats {
    double d_min = 0.0;
    double d_max = 0.0;
    double mean = 0.0;
    double std = 0.0; // population standard deviation
    double beta_alpha = 0.0;
    double beta_beta = 0.0;
    bool beta_defined = false;
};

/// Method-of-moments Beta fit for data on [0, 1] with mean m and variance v.
/// Undefined (nullopt) when v == 0 or v >= m(1 - m).
inline std::optional<std::pair<double, double>> beta_from_moments(double m, double v) {
    if (!(v > 0.0)) {
        return std::nullopt;
    }
    const double common = m * (1.0 - m) / v - 1.0;
    if (!(common > 0.0)) {
        return std::nullopt;
    }
    return std::pair{m * common, (1.0 - m) * common};
}

inline PriorStats fit_prior(std::span<const double> values) {
    if (values.size() < 2) {
        throw std::invalid_argument("fit_prior needs at least 2 values");
    }
    PriorStats p;
    p.d_min = values[0];
    p.d_max = values[0];
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("fit_prior: non-finite value");
        }
        p.d_min = std::min(p.d_min, v);
        p.d_max = std::max(p.d_max, v);
        sum += v;
    }
    const double n = static_cast<double>(values.size());
    p.mean = sum / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - p.mean) * (v - p.mean);
    }
    p.std = std::sqrt(ss / n);

    const double range = p.d_max - p.d_min;
    if (range > 0.0) {
        double rs = 0.0;
        for (double v : values) {
            rs += (v - p.d_min) / range;
        }
        const double m = rs / n;
        double rv = 0.0;
        for (double v : values) {
            const double u = (v - p.d_min) / range - m;
            rv += u * u;
        }
        if (auto ab = beta_from_moments(m, rv / n)) {
            p.beta_alpha = ab->first;
            p.beta_beta = ab->second;
            p.beta_defined = true;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Initialization

enum class InitFamily {
    Uniform,
    Normal,
    Beta,
    XavierUniform,
    XavierNormal,
    KaimingUniform,
    KaimingNormal,
    TruncatedNormal,
};

inline constexpr std::array<std::pair<InitFamily, std::string_view>, 8> kInitFamilyNames{{
    {InitFamily::Uniform, "uniform"},
    {InitFamily::Normal, "normal"},
    {InitFamily::Beta, "beta"},
    {InitFamily::XavierUniform, "xavier_uniform"},
    {InitFamily::XavierNormal, "xavier_normal"},
    {InitFamily::KaimingUniform, "kaiming_uniform"},
    {InitFamily::KaimingNormal, "kaiming_normal"},
    {InitFamily::TruncatedNormal, "truncated_normal"},
}};

inline std::string_view to_string(InitFamily f) {
    for (const auto &[fam, name] : kInitFamilyNames) {
        if (fam == f) {
            return name;
        }
    }
    return "?";
}

inline InitFamily parse_init_family(std::string_view s) {
    for (const auto &[fam, name] : kInitFamilyNames) {
        if (name == s) {
            return fam;
        }
    }
    throw std::invalid_argument("unknown init family '" + std::string(s) + "'");
}

inline constexpr bool has_prior_mapping(InitFamily f) {
    return f == InitFamily::Uniform || f == InitFamily::Normal || f == InitFamily::Beta;
}

struct InitStrategy {
    InitFamily family = InitFamily::Uniform;
    bool use_prior = false;
    /// Replaces the data-free Uniform(0, 1) range, e.g. [0, 2pi) for random-circuit studies.
    std::optional<std::pair<double, double>> uniform_range;

    void validate() const {
        if (use_prior && !has_prior_mapping(family)) {
            throw std::invalid_argument("init family '" + std::string(to_string(family)) +
                                        "' has no data prior");
        }
        if (uniform_range) {
            if (family != InitFamily::Uniform || use_prior) {
                throw std::invalid_argument("uniform_range applies only to data-free uniform init");
            }
            if (!(uniform_range->first < uniform_range->second)) {
                throw std::invalid_argument("uniform_range must satisfy low < high");
            }
        }
    }

    std::string id() const {
        std::string s(to_string(family));
        if (use_prior) {
            s += "+prior";
        }
        return s;
    }
};

/// Fills an (L, N, R) tensor with i.i.d. draws. Xavier/Kaiming use fan_in = fan_out = N*R.
/// Deterministic given `seed`.
inline ParamTensor sample_init(const InitStrategy &strategy, const PriorStats &prior, std::size_t layers,
                               std::size_t qubits, std::size_t rots, std::uint64_t seed) {
    strategy.validate();
    if (layers == 0 || qubits == 0 || rots == 0) {
        throw std::invalid_argument("sample_init: shape must be positive");
    }
    if (strategy.use_prior && strategy.family == InitFamily::Beta && !prior.beta_defined) {
        throw std::invalid_argument("Beta prior is undefined for degenerate data");
    }

    RngStream rng(seed, StreamPurpose::Init);
    ParamTensor out(layers, qubits, rots);
    const double fan = static_cast<double>(qubits * rots);
    const double lo = prior.d_min, hi = prior.d_max;

    auto uniform = [&](double a, double b) { return a == b ? a : rng.uniform(a, b); };

    for (double &v : out.values()) {
        switch (strategy.family) {
        case InitFamily::Uniform:
            if (strategy.use_prior) {
                v = std::clamp(uniform(lo, hi), lo, hi);
            } else if (strategy.uniform_range) {
                v = uniform(strategy.uniform_range->first, strategy.uniform_range->second);
            } else {
                v = uniform(0.0, 1.0);
            }
            break;
        case InitFamily::Normal:
            v = strategy.use_prior ? rng.normal(prior.mean, prior.std) : rng.normal();
            break;
        case InitFamily::Beta:
            if (strategy.use_prior) {
                v = std::clamp(lo + rng.beta(prior.beta_alpha, prior.beta_beta) * (hi - lo), lo, hi);
            } else {
                v = rng.beta(0.5, 0.5);
            }
            break;
        case InitFamily::XavierUniform: {
            const double a = std::sqrt(6.0 / (fan + fan));
            v = uniform(-a, a);
            break;
        }
        case InitFamily::XavierNormal:
            v = rng.normal(0.0, std::sqrt(2.0 / (fan + fan)));
            break;
        case InitFamily::KaimingUniform: {
            const double a = std::sqrt(6.0 / fan);
            v = uniform(-a, a);
            break;
        }
        case InitFamily::KaimingNormal:
            v = rng.normal(0.0, std::sqrt(2.0 / fan));
            break;
        case InitFamily::TruncatedNormal: {
            double x;
            do {
                x = rng.normal();
            } while (x < -2.0 || x > 2.0);
            v = x;
            break;
        }
        }
    }
    return out;
}

inline ParamTensor sample_init(const InitStrategy &strategy, const PriorStats &prior, const CircuitSpec &c,
                               std::uint64_t seed) {
    return sample_init(strategy, prior, c.n_layers, c.n_qubits, c.n_rot, seed);
}

// ---------------------------------------------------------------------------
// Diffusion

struct DiffusionSchedule {
    std::size_t total_steps = 0;
    double dr_min = 0.0;
    double dr_max = 0.0;
    std::vector<double> dr;
    std::vector<double> gamma;     // 1 - dr
    std::vector<double> gamma_bar; // running product of gamma
};

/// dr rises linearly from dr_min to dr_max over T steps, so gamma falls linearly.
inline DiffusionSchedule build_schedule(std::size_t total_steps, double dr_min, double dr_max) {
    if (total_steps < 1) {
        throw std::invalid_argument("schedule needs at least one step");
    }
    if (!(dr_min > 0.0 && dr_min <= dr_max && dr_max < 1.0)) {
        throw std::invalid_argument("diffusion rates must satisfy 0 < dr_min <= dr_max < 1");
    }
    DiffusionSchedule s{total_steps, dr_min, dr_max, {}, {}, {}};
    s.dr.resize(total_steps);
    s.gamma.resize(total_steps);
    s.gamma_bar.resize(total_steps);
    double running = 1.0;
    for (std::size_t t = 0; t < total_steps; ++t) {
        s.dr[t] = total_steps == 1
                      ? dr_min
                      : dr_min + (dr_max - dr_min) * static_cast<double>(t) / static_cast<double>(total_steps - 1);
        s.gamma[t] = 1.0 - s.dr[t];
        running *= s.gamma[t];
        if (!(running > 0.0)) {
            throw std::invalid_argument("cumulative keep rate underflows; shorten the schedule or lower dr_max");
        }
        s.gamma_bar[t] = running;
    }
    return s;
}

enum class DiffusionMode {
    Cumulative, // scale by the running product, as written in the training procedure
    PerStep,    // scale by the single-step keep rate gamma^(t)
};

inline double noise_keep(const DiffusionSchedule &s, std::size_t t, DiffusionMode mode) {
    return mode == DiffusionMode::Cumulative ? s.gamma_bar.at(t) : s.gamma.at(t);
}

/// sqrt(G) * theta + sqrt(1 - G) * eps, eps ~ N(0, I). Consumes params.size() normal draws.
inline ParamTensor diffuse(const ParamTensor &params, double gamma_bar_t, RngStream &rng) {
    if (!(gamma_bar_t > 0.0 && gamma_bar_t <= 1.0)) {
        throw std::invalid_argument("gamma_bar must lie in (0, 1]");
    }
    const double keep = std::sqrt(gamma_bar_t);
    const double noise = std::sqrt(1.0 - gamma_bar_t);
    ParamTensor out = params;
    for (double &v : out.values()) {
        v = keep * v + noise * rng.normal();
    }
    return out;
}

} // namespace vqclab
