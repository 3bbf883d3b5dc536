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

#include "vqclab/simcore.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numbers>
#include <random>

#include "support/dense_oracle.hpp"

using namespace vqclab;

namespace {

void expect_matches(const StateVector &s, const oracle::Vec &v, double tol) {
    ASSERT_EQ(static_cast<Eigen::Index>(s.dim()), v.size());
    for (std::size_t i = 0; i < s.dim(); ++i) {
        EXPECT_LT(std::abs(s[i] - v(static_cast<Eigen::Index>(i))), tol) << "amplitude " << i;
    }
}

StateVector basis_state(std::size_t n, std::size_t index) {
    std::vector<Complex> amps(std::size_t{1} << n);
    amps[index] = 1.0;
    return StateVector::from_amplitudes(amps);
}

} // namespace

TEST(StateVector, zero_state_one_qubit) {
    auto s = StateVector::zero(1);
    ASSERT_EQ(s.dim(), 2u);
    EXPECT_EQ(s[0], Complex(1, 0));
    EXPECT_EQ(s[1], Complex(0, 0));
}

TEST(StateVector, zero_state_three_qubits) {
    auto s = StateVector::zero(3);
    ASSERT_EQ(s.dim(), 8u);
    EXPECT_EQ(s[0], Complex(1, 0));
    for (std::size_t i = 1; i < 8; ++i) {
        EXPECT_EQ(s[i], Complex(0, 0));
    }
}

TEST(StateVector, resource_guard) {
    EXPECT_THROW(StateVector::zero(17), ResourceLimitError);
    EXPECT_THROW(StateVector::zero(0), ResourceLimitError);
    EXPECT_NO_THROW(StateVector::zero(16));
}

TEST(Rotation, zero_angle_is_identity) {
    std::mt19937_64 rng(1);
    auto s = oracle::random_state(3, rng);
    const auto before = s;
    apply_rotation(s, Axis::Y, 1, 0.0);
    for (std::size_t i = 0; i < s.dim(); ++i) {
        EXPECT_EQ(s[i], before[i]);
    }
}

TEST(Rotation, ry_pi_flips_zero_to_one) {
    auto s = StateVector::zero(1);
    apply_rotation(s, Axis::Y, 0, std::numbers::pi);
    EXPECT_LT(std::abs(s[0]), 1e-15);
    EXPECT_LT(std::abs(s[1] - Complex(1, 0)), 1e-15);
}

TEST(Rotation, rx_matches_kronecker_oracle) {
    std::mt19937_64 rng(7);
    auto s = oracle::random_state(3, rng);
    const oracle::Vec expected = oracle::single(3, 1, oracle::rotation('X', 0.7)) * oracle::to_vec(s);
    apply_rotation(s, Axis::X, 1, 0.7);
    expect_matches(s, expected, 1e-12);
}

TEST(Rotation, every_axis_and_qubit_matches_oracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(-4.0, 4.0);
    for (std::size_t n = 1; n <= 4; ++n) {
        for (std::size_t q = 0; q < n; ++q) {
            for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
                auto s = oracle::random_state(n, rng);
                const double theta = ang(rng);
                const oracle::Vec expected =
                    oracle::single(n, q, oracle::rotation(oracle::axis_char(a), theta)) * oracle::to_vec(s);
                apply_rotation(s, a, q, theta);
                expect_matches(s, expected, 1e-12);
            }
        }
    }
}

TEST(Rotation, rejects_bad_input) {
    auto s = StateVector::zero(2);
    EXPECT_THROW(apply_rotation(s, Axis::X, 2, 0.1), std::out_of_range);
    EXPECT_THROW(apply_rotation(s, Axis::X, 0, std::nan("")), std::invalid_argument);
}

TEST(Entangler, cnot_on_basis_state) {
    // |10>: qubit 1 (control) set, qubit 0 clear -> index 2. CNOT(1 -> 0) gives |11> = index 3.
    auto s = basis_state(2, 0b10);
    apply_entangler(s, GateKind::CNOT, 1, 0);
    EXPECT_EQ(s[0b11], Complex(1, 0));
    EXPECT_EQ(s[0b10], Complex(0, 0));
}

TEST(Entangler, cnot_is_an_involution) {
    std::mt19937_64 rng(3);
    auto s = oracle::random_state(3, rng);
    const auto before = s;
    apply_entangler(s, GateKind::CNOT, 0, 2);
    apply_entangler(s, GateKind::CNOT, 0, 2);
    for (std::size_t i = 0; i < s.dim(); ++i) {
        EXPECT_LT(std::abs(s[i] - before[i]), 1e-12);
    }
}

TEST(Entangler, cnot_0_2_matches_oracle) {
    std::mt19937_64 rng(5);
    auto s = oracle::random_state(3, rng);
    const oracle::Vec expected = oracle::controlled(3, 0, 2, oracle::pauli('X')) * oracle::to_vec(s);
    apply_entangler(s, GateKind::CNOT, 0, 2);
    expect_matches(s, expected, 1e-12);
}

TEST(Entangler, all_pairs_match_oracle) {
    std::mt19937_64 rng(9);
    for (std::size_t n = 2; n <= 4; ++n) {
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t t = 0; t < n; ++t) {
                if (c == t) {
                    continue;
                }
                for (GateKind k : {GateKind::CNOT, GateKind::CZ}) {
                    auto s = oracle::random_state(n, rng);
                    const oracle::Vec expected =
                        oracle::controlled(n, c, t, oracle::pauli(k == GateKind::CNOT ? 'X' : 'Z')) *
                        oracle::to_vec(s);
                    apply_entangler(s, k, c, t);
                    expect_matches(s, expected, 1e-12);
                }
            }
        }
    }
}

TEST(Entangler, rejects_bad_indices) {
    auto s = StateVector::zero(3);
    EXPECT_THROW(apply_entangler(s, GateKind::CNOT, 1, 1), std::invalid_argument);
    EXPECT_THROW(apply_entangler(s, GateKind::CZ, 0, 3), std::out_of_range);
    EXPECT_THROW(apply_entangler(s, GateKind::RX, 0, 1), std::invalid_argument);
}

TEST(Expectation, z_on_zero_state) {
    EXPECT_DOUBLE_EQ(expectation(StateVector::zero(1), ObservableSpec::z(1, 0)), 1.0);
}

TEST(Expectation, z_on_plus_state) {
    const double r = 1.0 / std::sqrt(2.0);
    auto s = StateVector::from_amplitudes({r, r});
    EXPECT_NEAR(expectation(s, ObservableSpec::z(1, 0)), 0.0, 1e-12);
}

TEST(Expectation, zz_matches_quadratic_form) {
    std::mt19937_64 rng(13);
    auto s = oracle::random_state(3, rng);
    ObservableSpec obs{{PauliTerm{0.5, "ZZI"}}};
    const double expected = oracle::expectation(oracle::to_vec(s), oracle::observable_matrix(obs));
    EXPECT_NEAR(expectation(s, obs), expected, 1e-10);
}

TEST(Expectation, mixed_pauli_terms_match_quadratic_form) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> sym(0, 3);
    std::normal_distribution<double> coef;
    for (std::size_t n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            ObservableSpec obs;
            for (int t = 0; t < 3; ++t) {
                std::string p(n, 'I');
                for (auto &c : p) {
                    c = "IXYZ"[sym(rng)];
                }
                obs.terms.push_back({coef(rng), p});
            }
            auto s = oracle::random_state(n, rng);
            const double expected = oracle::expectation(oracle::to_vec(s), oracle::observable_matrix(obs));
            const double got = expectation(s, obs);
            EXPECT_NEAR(got, expected, 1e-10);
            EXPECT_LE(std::abs(got), obs.coefficient_l1() + 1e-12);
        }
    }
}

TEST(Expectation, zero_projector_is_ground_state_population) {
    std::mt19937_64 rng(19);
    for (std::size_t n = 1; n <= 4; ++n) {
        auto s = oracle::random_state(n, rng);
        const auto obs = ObservableSpec::zero_projector(n);
        EXPECT_EQ(obs.terms.size(), std::size_t{1} << n);
        EXPECT_NEAR(expectation(s, obs), std::norm(s[0]), 1e-14);
        CompiledObservable compiled(obs, n);
        EXPECT_TRUE(compiled.is_diagonal());
    }
}

TEST(Expectation, length_mismatch) {
    EXPECT_THROW(expectation(StateVector::zero(2), ObservableSpec::z(3, 0)), std::invalid_argument);
    EXPECT_THROW(expectation(StateVector::zero(1), ObservableSpec{}), std::invalid_argument);
    EXPECT_THROW(expectation(StateVector::zero(1), ObservableSpec{{{1.0, "Q"}}}), std::invalid_argument);
}

// Random gate sequences on N <= 4 must agree with the dense matrix product and keep unit norm.
TEST(Properties, random_programs_match_oracle_and_preserve_norm) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ang(-6.3, 6.3);
    for (std::size_t n = 1; n <= 4; ++n) {
        std::uniform_int_distribution<std::size_t> qd(0, n - 1);
        std::uniform_int_distribution<int> kd(0, n > 1 ? 4 : 2);
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<GateOp> prog;
            for (int g = 0; g < 30; ++g) {
                const auto k = static_cast<GateKind>(kd(rng));
                if (is_rotation(k)) {
                    prog.push_back(GateOp::fixed_rotation(rotation_axis(k), qd(rng), ang(rng)));
                } else {
                    std::size_t c = qd(rng), t = qd(rng);
                    while (t == c) {
                        t = qd(rng);
                    }
                    prog.push_back(GateOp::entangler(k, c, t));
                }
            }
            auto s = StateVector::zero(n);
            for (const auto &op : prog) {
                apply_op(s, op, {});
                ASSERT_LT(std::abs(s.norm_squared() - 1.0), 1e-10);
            }
            expect_matches(s, oracle::run_program(n, prog, {}), 1e-10);
        }
    }
}

TEST(Properties, deterministic_bitwise) {
    std::mt19937_64 rng(29);
    auto a = oracle::random_state(4, rng);
    auto b = a;
    for (auto *s : {&a, &b}) {
        apply_rotation(*s, Axis::X, 2, 0.3);
        apply_entangler(*s, GateKind::CNOT, 2, 3);
        apply_rotation(*s, Axis::Z, 3, -1.1);
    }
    EXPECT_EQ(std::memcmp(a.amplitudes().data(), b.amplitudes().data(), a.dim() * sizeof(Complex)), 0);
}

TEST(GateOp, validity) {
    EXPECT_TRUE(GateOp::rotation(Axis::X, 0, 0).is_valid());
    EXPECT_TRUE(GateOp::fixed_rotation(Axis::Y, 0, 0.1).is_valid());
    EXPECT_TRUE(GateOp::entangler(GateKind::CNOT, 0, 1).is_valid());
    EXPECT_FALSE(GateOp::entangler(GateKind::CZ, 1, 1).is_valid());
    GateOp both = GateOp::rotation(Axis::X, 0, 0);
    both.fixed_angle = 1.0;
    EXPECT_FALSE(both.is_valid());
}
