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

// Dense statevector simulator.
//
// Conventions used throughout the library:
//  - qubit 0 is the least-significant bit of the amplitude index;
//  - rotations are R_P(angle) = exp(-i * angle/2 * P).

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vqclab {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 16;

/// Raised when a request would exceed the desk-scale simulation cap.
class ResourceLimitError : public std::length_error {
  public:
    using std::length_error::length_error;
};

enum class Axis : std::uint8_t { X, Y, Z };
enum class GateKind : std::uint8_t { RX, RY, RZ, CNOT, CZ };

inline constexpr bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

inline constexpr GateKind rotation_kind(Axis a) {
    switch (a) {
    case Axis::X: return GateKind::RX;
    case Axis::Y: return GateKind::RY;
    case Axis::Z: return GateKind::RZ;
    }
    return GateKind::RX;
}

inline constexpr Axis rotation_axis(GateKind k) {
    switch (k) {
    case GateKind::RY: return Axis::Y;
    case GateKind::RZ: return Axis::Z;
    default: return Axis::X;
    }
}

inline std::string_view to_string(GateKind k) {
    switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    }
    return "?";
}

class StateVector {
  public:
    /// |0...0> on n_qubits qubits.
    static StateVector zero(std::size_t n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw ResourceLimitError("n_qubits must be in [1, " + std::to_string(kMaxQubits) +
                                     "], got " + std::to_string(n_qubits));
        }
        StateVector s;
        s.n_qubits_ = n_qubits;
        s.amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        s.amps_[0] = Complex{1.0, 0.0};
        return s;
    }

    /// Wraps caller-provided amplitudes; the length must be a power of two.
    static StateVector from_amplitudes(std::vector<Complex> amps) {
        if (amps.size() < 2 || !std::has_single_bit(amps.size())) {
            throw std::invalid_argument("amplitude count must be a power of two >= 2");
        }
        const auto n = static_cast<std::size_t>(std::countr_zero(amps.size()));
        if (n > kMaxQubits) {
            throw ResourceLimitError("state exceeds " + std::to_string(kMaxQubits) + " qubits");
        }
        StateVector s;
        s.n_qubits_ = n;
        s.amps_ = std::move(amps);
        return s;
    }

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    std::span<Complex> amplitudes() { return amps_; }
    const Complex &operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const {
        double acc = 0.0;
        for (const auto &a : amps_) {
            acc += std::norm(a);
        }
        return acc;
    }

  private:
    StateVector() = default;
    std::size_t n_qubits_ = 0;
    std::vector<Complex> amps_;
};

namespace detail {

inline void check_qubit(const StateVector &s, std::size_t q) {
    if (q >= s.n_qubits()) {
        throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                std::to_string(s.n_qubits()) + "-qubit state");
    }
}

// Visits every amplitude pair (i0, i1) differing only in bit q, with i0 having the bit clear.
template <class Fn> inline void for_each_pair(std::size_t dim, std::size_t q, Fn &&fn) {
    const std::size_t stride = std::size_t{1} << q;
    if (stride == 1) {
        for (std::size_t i0 = 0; i0 < dim; i0 += 2) {
            fn(i0, i0 + 1);
        }
        return;
    }
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i0 = base; i0 < base + stride; ++i0) {
            fn(i0, i0 + stride);
        }
    }
}

// Visits every index with both bits `lo` and `hi` clear (lo < hi, both single-bit masks),
// as contiguous runs of length lo.
template <class Fn> inline void for_each_clear2(std::size_t dim, std::size_t lo, std::size_t hi, Fn &&fn) {
    for (std::size_t outer = 0; outer < dim; outer += 2 * hi) {
        for (std::size_t mid = outer; mid < outer + hi; mid += 2 * lo) {
            for (std::size_t i = mid; i < mid + lo; ++i) {
                fn(i);
            }
        }
    }
}

} // namespace detail

/// Applies exp(-i angle/2 P) for P in {X, Y, Z} on `qubit`, in place.
inline void apply_rotation(StateVector &state, Axis axis, std::size_t qubit, double angle) {
    detail::check_qubit(state, qubit);
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("rotation angle must be finite");
    }
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    auto amps = state.amplitudes();
    Complex *a = amps.data();
    switch (axis) {
    case Axis::X:
        detail::for_each_pair(state.dim(), qubit, [&](std::size_t i0, std::size_t i1) {
            const Complex v0 = a[i0];
            const Complex v1 = a[i1];
            // -i s * v = (s*v.imag, -s*v.real)
            a[i0] = Complex{c * v0.real() + s * v1.imag(), c * v0.imag() - s * v1.real()};
            a[i1] = Complex{c * v1.real() + s * v0.imag(), c * v1.imag() - s * v0.real()};
        });
        break;
    case Axis::Y:
        detail::for_each_pair(state.dim(), qubit, [&](std::size_t i0, std::size_t i1) {
            const Complex v0 = a[i0];
            const Complex v1 = a[i1];
            a[i0] = c * v0 - s * v1;
            a[i1] = s * v0 + c * v1;
        });
        break;
    case Axis::Z:
        // diag(c - i s, c + i s), written out to stay on the plain multiply path.
        detail::for_each_pair(state.dim(), qubit, [&](std::size_t i0, std::size_t i1) {
            const double r0 = a[i0].real(), m0 = a[i0].imag();
            const double r1 = a[i1].real(), m1 = a[i1].imag();
            a[i0] = Complex{c * r0 + s * m0, c * m0 - s * r0};
            a[i1] = Complex{c * r1 - s * m1, c * m1 + s * r1};
        });
        break;
    }
}

/// Applies CNOT or CZ in place. For CZ the roles of control and target are symmetric.
inline void apply_entangler(StateVector &state, GateKind kind, std::size_t control,
                            std::size_t target) {
    if (kind != GateKind::CNOT && kind != GateKind::CZ) {
        throw std::invalid_argument("entangler kind must be CNOT or CZ");
    }
    detail::check_qubit(state, control);
    detail::check_qubit(state, target);
    if (control == target) {
        throw std::invalid_argument("control and target must differ");
    }
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t lo = std::min(cmask, tmask);
    const std::size_t hi = std::max(cmask, tmask);
    Complex *a = state.amplitudes().data();
    if (kind == GateKind::CNOT) {
        detail::for_each_clear2(state.dim(), lo, hi, [&](std::size_t i) {
            std::swap(a[i | cmask], a[i | cmask | tmask]);
        });
    } else {
        detail::for_each_clear2(state.dim(), lo, hi, [&](std::size_t i) {
            a[i | cmask | tmask] = -a[i | cmask | tmask];
        });
    }
}

struct GateOp {
    GateKind kind = GateKind::RX;
    std::size_t qubit0 = 0;
    std::size_t qubit1 = 0; // entanglers only: the target
    std::optional<std::size_t> param_slot;
    std::optional<double> fixed_angle;

    static GateOp rotation(Axis axis, std::size_t qubit, std::size_t slot) {
        return GateOp{rotation_kind(axis), qubit, 0, slot, std::nullopt};
    }
    static GateOp fixed_rotation(Axis axis, std::size_t qubit, double angle) {
        return GateOp{rotation_kind(axis), qubit, 0, std::nullopt, angle};
    }
    static GateOp entangler(GateKind kind, std::size_t control, std::size_t target) {
        return GateOp{kind, control, target, std::nullopt, std::nullopt};
    }

    bool is_valid() const {
        if (is_rotation(kind)) {
            return param_slot.has_value() != fixed_angle.has_value();
        }
        return qubit0 != qubit1 && !param_slot && !fixed_angle;
    }

    friend bool operator==(const GateOp &, const GateOp &) = default;
};

/// Applies a single program op; `params` resolves param_slot rotations.
inline void apply_op(StateVector &state, const GateOp &op, std::span<const double> params) {
    if (is_rotation(op.kind)) {
        double angle = 0.0;
        if (op.param_slot) {
            if (*op.param_slot >= params.size()) {
                throw std::out_of_range("param_slot out of range");
            }
            angle = params[*op.param_slot];
        } else if (op.fixed_angle) {
            angle = *op.fixed_angle;
        } else {
            throw std::invalid_argument("rotation carries neither param_slot nor fixed_angle");
        }
        apply_rotation(state, rotation_axis(op.kind), op.qubit0, angle);
    } else {
        apply_entangler(state, op.kind, op.qubit0, op.qubit1);
    }
}

// ---------------------------------------------------------------------------
// Observables

enum class Pauli : char { I = 'I', X = 'X', Y = 'Y', Z = 'Z' };

struct PauliTerm {
    double coefficient = 1.0;
    /// One symbol per qubit; character k acts on qubit k.
    std::string paulis;
};

struct ObservableSpec {
    std::vector<PauliTerm> terms;

    std::size_t n_qubits() const { return terms.empty() ? 0 : terms.front().paulis.size(); }

    /// Single Z on `qubit` of an n-qubit register.
    static ObservableSpec z(std::size_t n_qubits, std::size_t qubit, double coefficient = 1.0) {
        std::string s(n_qubits, 'I');
        s.at(qubit) = 'Z';
        return ObservableSpec{{PauliTerm{coefficient, std::move(s)}}};
    }

    /// |0...0><0...0| written as 2^-n * sum over all Z-strings.
    static ObservableSpec zero_projector(std::size_t n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw ResourceLimitError("zero_projector: n_qubits out of range");
        }
        const std::size_t count = std::size_t{1} << n_qubits;
        const double coefficient = 1.0 / static_cast<double>(count);
        ObservableSpec obs;
        obs.terms.reserve(count);
        for (std::size_t mask = 0; mask < count; ++mask) {
            std::string s(n_qubits, 'I');
            for (std::size_t q = 0; q < n_qubits; ++q) {
                if (mask & (std::size_t{1} << q)) {
                    s[q] = 'Z';
                }
            }
            obs.terms.push_back(PauliTerm{coefficient, std::move(s)});
        }
        return obs;
    }

    double coefficient_l1() const {
        double acc = 0.0;
        for (const auto &t : terms) {
            acc += std::abs(t.coefficient);
        }
        return acc;
    }
};

/// An observable lowered to bit masks for a fixed register size.
///
/// Observables made only of I/Z factors are folded into a diagonal of length
/// 2^n (via a Walsh-Hadamard transform of the Z-mask coefficients) so each
/// expectation is a single pass over the probabilities.
class CompiledObservable {
  public:
    CompiledObservable(const ObservableSpec &spec, std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (spec.terms.empty()) {
            throw std::invalid_argument("observable needs at least one term");
        }
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw ResourceLimitError("observable register size out of range");
        }
        bool diagonal = true;
        for (const auto &t : spec.terms) {
            if (t.paulis.size() != n_qubits) {
                throw std::invalid_argument("pauli string length " + std::to_string(t.paulis.size()) +
                                            " does not match " + std::to_string(n_qubits) +
                                            " qubits");
            }
            if (!std::isfinite(t.coefficient)) {
                throw std::invalid_argument("observable coefficient must be finite");
            }
            Masked m{t.coefficient, 0, 0, 0};
            for (std::size_t q = 0; q < n_qubits; ++q) {
                const std::size_t bit = std::size_t{1} << q;
                switch (t.paulis[q]) {
                case 'I': break;
                case 'X': m.x_mask |= bit; break;
                case 'Y':
                    m.x_mask |= bit;
                    m.z_mask |= bit;
                    ++m.n_y;
                    break;
                case 'Z': m.z_mask |= bit; break;
                default:
                    throw std::invalid_argument(std::string("invalid pauli symbol '") + t.paulis[q] +
                                                "'");
                }
            }
            diagonal = diagonal && m.x_mask == 0;
            terms_.push_back(m);
        }
        coefficient_l1_ = spec.coefficient_l1();
        if (diagonal) {
            build_diagonal();
        }
    }

    std::size_t n_qubits() const { return n_qubits_; }
    bool is_diagonal() const { return !diagonal_.empty(); }
    double coefficient_l1() const { return coefficient_l1_; }

    double expectation(const StateVector &state) const {
        if (state.n_qubits() != n_qubits_) {
            throw std::invalid_argument("observable/state qubit count mismatch");
        }
        const auto amps = state.amplitudes();
        if (is_diagonal()) {
            double acc = 0.0;
            for (std::size_t i = 0; i < amps.size(); ++i) {
                acc += std::norm(amps[i]) * diagonal_[i];
            }
            return acc;
        }
        double acc = 0.0;
        for (const auto &t : terms_) {
            // P|x> = i^{n_y} (-1)^{|x & z|} |x ^ x_mask>, with Y = iXZ.
            Complex sum{0.0, 0.0};
            for (std::size_t i = 0; i < amps.size(); ++i) {
                const double sign = (std::popcount(i & t.z_mask) & 1) ? -1.0 : 1.0;
                sum += std::conj(amps[i ^ t.x_mask]) * amps[i] * sign;
            }
            static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            sum *= kIPow[t.n_y % 4];
            acc += t.coefficient * sum.real();
        }
        return acc;
    }

  private:
    struct Masked {
        double coefficient;
        std::size_t x_mask;
        std::size_t z_mask;
        std::size_t n_y;
    };

    void build_diagonal() {
        const std::size_t dim = std::size_t{1} << n_qubits_;
        diagonal_.assign(dim, 0.0);
        for (const auto &t : terms_) {
            diagonal_[t.z_mask] += t.coefficient;
        }
        // In-place fast Walsh-Hadamard transform: d[x] = sum_z c[z] (-1)^{|x & z|}.
        for (std::size_t len = 1; len < dim; len <<= 1) {
            for (std::size_t base = 0; base < dim; base += 2 * len) {
                for (std::size_t j = base; j < base + len; ++j) {
                    const double u = diagonal_[j];
                    const double v = diagonal_[j + len];
                    diagonal_[j] = u + v;
                    diagonal_[j + len] = u - v;
                }
            }
        }
    }

    std::size_t n_qubits_;
    std::vector<Masked> terms_;
    std::vector<double> diagonal_;
    double coefficient_l1_ = 0.0;
};

/// Sum over terms of coefficient * <psi|P|psi>.
inline double expectation(const StateVector &state, const ObservableSpec &obs) {
    return CompiledObservable(obs, state.n_qubits()).expectation(state);
}

} // namespace vqclab
