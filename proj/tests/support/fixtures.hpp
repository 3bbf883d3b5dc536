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

// Format-faithful stand-ins for the Titanic and MNIST files: same columns,
// quoting, missing-value pattern, IDX headers and dimensions. Contents are
// synthetic but class-dependent so the binary tasks are learnable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("vqclab_" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

/// 891 passengers, 342 survivors, 177 missing ages, 2 missing ports.
inline std::filesystem::path write_titanic(const std::filesystem::path &file, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::vector<int> survived(891, 0);
    std::fill(survived.begin(), survived.begin() + 342, 1);
    std::shuffle(survived.begin(), survived.end(), rng);
    std::vector<bool> no_age(891, false), no_port(891, false);
    std::fill(no_age.begin(), no_age.begin() + 177, true);
    std::shuffle(no_age.begin(), no_age.end(), rng);
    no_port[61] = no_port[829] = true;

    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> cls(1, 3), sib(0, 3), par(0, 2), port(0, 2);
    std::normal_distribution<double> age(30.0, 13.0), fare(20.0, 10.0);
    const char *ports[] = {"S", "C", "Q"};
    const char *titles[] = {"Mr.", "Mrs.", "Miss.", "Master."};

    std::ofstream out(file);
    out << "PassengerId,Survived,Pclass,Name,Sex,Age,SibSp,Parch,Ticket,Fare,Cabin,Embarked\n";
    for (int i = 0; i < 891; ++i) {
        const int s = survived[i];
        // Survivors skew female and first class.
        const bool female = std::bernoulli_distribution(s ? 0.68 : 0.15)(rng);
        const int pclass = s ? (coin(rng) ? 1 : cls(rng)) : (coin(rng) ? 3 : cls(rng));
        out << i + 1 << ',' << s << ',' << pclass << ",\"Surname" << i << ", " << titles[(female ? 1 : 0) + 2 * coin(rng)]
            << " Given \"\"Nick\"\" Name\"," << (female ? "female" : "male") << ',';
        if (!no_age[i]) {
            out << std::clamp(std::round(age(rng)), 1.0, 80.0);
        }
        out << ',' << sib(rng) << ',' << par(rng) << ",\"A/5 " << 20000 + i << "\","
            << std::max(0.0, fare(rng) * (4 - pclass)) << ',';
        if (pclass == 1) {
            out << 'C' << 10 + i % 90;
        }
        out << ',';
        if (!no_port[i]) {
            out << ports[port(rng)];
        }
        out << '\n';
    }
    return file;
}

namespace detail {

inline void put_be32(std::ofstream &out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char *>(b), 4);
}

} // namespace detail

/// IDX image/label pair in `dir`; digit d is a noisy bar whose angle depends on d.
inline std::filesystem::path write_mnist(const std::filesystem::path &dir, std::uint32_t count = 60000,
                                         std::uint64_t seed = 11) {
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 30.0);
    std::ofstream img(dir / "train-images-idx3-ubyte", std::ios::binary);
    std::ofstream lab(dir / "train-labels-idx1-ubyte", std::ios::binary);
    detail::put_be32(img, 0x00000803);
    detail::put_be32(img, count);
    detail::put_be32(img, 28);
    detail::put_be32(img, 28);
    detail::put_be32(lab, 0x00000801);
    detail::put_be32(lab, count);
    std::vector<unsigned char> pixels(784);
    for (std::uint32_t i = 0; i < count; ++i) {
        const unsigned char digit = static_cast<unsigned char>((i * 7 + i / 10) % 10);
        const double angle = digit * 3.14159265358979 / 10.0;
        const double c = std::cos(angle), s = std::sin(angle);
        for (int y = 0; y < 28; ++y) {
            for (int x = 0; x < 28; ++x) {
                const double dx = x - 13.5, dy = y - 13.5;
                const double off = std::abs(-s * dx + c * dy);
                const double along = std::abs(c * dx + s * dy);
                double v = (off < 2.0 && along < 10.0) ? 220.0 : 0.0;
                v += noise(rng);
                pixels[y * 28 + x] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
            }
        }
        img.write(reinterpret_cast<const char *>(pixels.data()), 784);
        lab.put(static_cast<char>(digit));
    }
    return dir;
}

} // namespace testing_support
