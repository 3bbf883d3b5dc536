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

// Layered hardware-efficient ansatz with RY angle encoding.
//
//   |0..0> -> RY(x_0) ... RY(x_{N-1})
//          -> repeat L times: [per qubit: R rotations with axes rot_axes]
//                             [ring of entanglers q -> q+1 mod N]
//
// Parameters are laid out (layer, qubit, rotation), row-major.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqclab/simcore.hpp"

namespace vqclab {

enum class EntanglerKind { CnotRing, CzRing };

struct CircuitSpec {
    std::size_t n_qubits = 0;
    std::size_t n_rot = 0;
    std::size_t n_layers = 0;
    std::vector<Axis> rot_axes;
    EntanglerKind entangler = EntanglerKind::CnotRing;
    /// Trainable part of the program (everything after the encoding layer).
    std::vector<GateOp> layers;

    std::size_t param_count() const { return n_qubits * n_rot * n_layers; }
    std::size_t first_layer_count() const { return n_qubits * n_rot; }
    std::size_t slot(std::size_t layer, std::size_t qubit, std::size_t rot) const {
        return (layer * n_qubits + qubit) * n_rot + rot;
    }
};

class ParamTensor {
  public:
    ParamTensor() = default;
    ParamTensor(std::size_t layers, std::size_t qubits, std::size_t rots, double fill = 0.0)
        : layers_(layers), qubits_(qubits), rots_(rots), values_(layers * qubits * rots, fill) {}

    static ParamTensor like(const CircuitSpec &c, double fill = 0.0) {
        return ParamTensor(c.n_layers, c.n_qubits, c.n_rot, fill);
    }

    std::size_t layers() const { return layers_; }
    std::size_t qubits() const { return qubits_; }
    std::size_t rots() const { return rots_; }
    std::size_t size() const { return values_.size(); }

    double &at(std::size_t l, std::size_t n, std::size_t r) { return values_.at((l * qubits_ + n) * rots_ + r); }
    double at(std::size_t l, std::size_t n, std::size_t r) const {
        return values_.at((l * qubits_ + n) * rots_ + r);
    }
    double &operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool matches(const CircuitSpec &c) const {
        return layers_ == c.n_layers && qubits_ == c.n_qubits && rots_ == c.n_rot;
    }
    bool all_finite() const {
        for (double v : values_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const ParamTensor &, const ParamTensor &) = default;

  private:
    std::size_t layers_ = 0;
    std::size_t qubits_ = 0;
    std::size_t rots_ = 0;
    std::vector<double> values_;
};

struct EncodedSample {
    std::vector<double> angles; // one per qubit, in [0, pi]
    int label = 0;
};

inline std::vector<Axis> default_rot_axes(std::size_t n_rot) {
    static constexpr Axis kCycle[3] = {Axis::X, Axis::Y, Axis::Z};
    std::vector<Axis> axes(n_rot);
    for (std::size_t r = 0; r < n_rot; ++r) {
        axes[r] = kCycle[r % 3];
    }
    return axes;
}

inline CircuitSpec build_circuit(std::size_t n_qubits, std::size_t n_rot, std::size_t n_layers,
                                 std::vector<Axis> rot_axes = {},
                                 EntanglerKind entangler = EntanglerKind::CnotRing) {
    if (n_qubits < 1 || n_rot < 1 || n_layers < 1) {
        throw std::invalid_argument("circuit dimensions must all be >= 1");
    }
    if (n_qubits > kMaxQubits) {
        throw ResourceLimitError("circuit exceeds " + std::to_string(kMaxQubits) + " qubits");
    }
    if (rot_axes.empty()) {
        rot_axes = default_rot_axes(n_rot);
    }
    if (rot_axes.size() != n_rot) {
        throw std::invalid_argument("rot_axes length must equal n_rot");
    }

    CircuitSpec c{n_qubits, n_rot, n_layers, std::move(rot_axes), entangler, {}};
    const GateKind ent = entangler == EntanglerKind::CnotRing ? GateKind::CNOT : GateKind::CZ;
    // A 2-qubit ring would pair the same qubits twice; keep a single link.
    const std::size_t ring_links = n_qubits == 1 ? 0 : (n_qubits == 2 ? 1 : n_qubits);
    for (std::size_t l = 0; l < n_layers; ++l) {
        for (std::size_t q = 0; q < n_qubits; ++q) {
            for (std::size_t r = 0; r < n_rot; ++r) {
                c.layers.push_back(GateOp::rotation(c.rot_axes[r], q, c.slot(l, q, r)));
            }
        }
        for (std::size_t q = 0; q < ring_links; ++q) {
            c.layers.push_back(GateOp::entangler(ent, q, (q + 1) % n_qubits));
        }
    }
    return c;
}

/// Full program for one sample: the RY encoding layer followed by the trainable layers.
inline std::vector<GateOp> program_for(const CircuitSpec &c, const EncodedSample &sample) {
    if (sample.angles.size() != c.n_qubits) {
        throw std::invalid_argument("sample has " + std::to_string(sample.angles.size()) +
                                    " angles, circuit has " + std::to_string(c.n_qubits) + " qubits");
    }
    std::vector<GateOp> prog;
    prog.reserve(c.n_qubits + c.layers.size());
    for (std::size_t q = 0; q < c.n_qubits; ++q) {
        prog.push_back(GateOp::fixed_rotation(Axis::Y, q, sample.angles[q]));
    }
    prog.insert(prog.end(), c.layers.begin(), c.layers.end());
    return prog;
}

namespace detail {

inline void check_shapes(const CircuitSpec &c, const ParamTensor &params, const EncodedSample &sample,
                         const CompiledObservable &obs) {
    if (!params.matches(c)) {
        throw std::invalid_argument("parameter tensor shape does not match circuit");
    }
    if (sample.angles.size() != c.n_qubits) {
        throw std::invalid_argument("sample angle count does not match circuit qubits");
    }
    if (obs.n_qubits() != c.n_qubits) {
        throw std::invalid_argument("observable qubit count does not match circuit");
    }
}

inline StateVector encoded_state(const CircuitSpec &c, const EncodedSample &sample) {
    StateVector s = StateVector::zero(c.n_qubits);
    for (std::size_t q = 0; q < c.n_qubits; ++q) {
        apply_rotation(s, Axis::Y, q, sample.angles[q]);
    }
    return s;
}

inline void run_ops(StateVector &s, std::span<const GateOp> ops, std::span<const double> params) {
    for (const auto &op : ops) {
        apply_op(s, op, params);
    }
}

// Parameter-shift over the first `slot_limit` parameter slots. The state before
// each parameterized gate is carried forward so every shifted evaluation only
// replays the suffix; the arithmetic is identical to a fresh evaluation.
inline std::vector<double> shift_gradient(const CircuitSpec &c, const ParamTensor &params,
                                          const EncodedSample &sample, const CompiledObservable &obs,
                                          std::size_t slot_limit) {
    constexpr double kShift = std::numbers::pi / 2.0;
    std::vector<double> grad(slot_limit, 0.0);
    std::vector<double> shifted(params.values().begin(), params.values().end());
    const std::span<const GateOp> ops(c.layers);

    StateVector prefix = encoded_state(c, sample);
    std::size_t done = 0;
    for (std::size_t i = 0; i < ops.size() && done < slot_limit; ++i) {
        const GateOp &op = ops[i];
        if (op.param_slot && *op.param_slot < slot_limit) {
            const std::size_t k = *op.param_slot;
            const double theta = shifted[k];
            double e[2];
            for (int side = 0; side < 2; ++side) {
                shifted[k] = side == 0 ? theta + kShift : theta - kShift;
                StateVector s = prefix;
                run_ops(s, ops.subspan(i), shifted);
                e[side] = obs.expectation(s);
            }
            shifted[k] = theta;
            grad[k] = 0.5 * (e[0] - e[1]);
            ++done;
        }
        apply_op(prefix, op, shifted);
    }
    return grad;
}

} // namespace detail

/// E(theta) = <0| U^dagger H U |0> with the sample encoded before layer 1.
inline double evaluate(const CircuitSpec &c, const ParamTensor &params, const EncodedSample &sample,
                       const CompiledObservable &obs) {
    detail::check_shapes(c, params, sample, obs);
    StateVector s = detail::encoded_state(c, sample);
    detail::run_ops(s, c.layers, params.values());
    return obs.expectation(s);
}

inline double evaluate(const CircuitSpec &c, const ParamTensor &params, const EncodedSample &sample,
                       const ObservableSpec &obs) {
    return evaluate(c, params, sample, CompiledObservable(obs, c.n_qubits));
}

/// dE/dtheta_k = [E(theta_k + pi/2) - E(theta_k - pi/2)] / 2 for every k.
/// Shape and layout follow `params`.
inline ParamTensor gradient(const CircuitSpec &c, const ParamTensor &params, const EncodedSample &sample,
                            const CompiledObservable &obs) {
    detail::check_shapes(c, params, sample, obs);
    const auto g = detail::shift_gradient(c, params, sample, obs, c.param_count());
    ParamTensor out = ParamTensor::like(c);
    std::copy(g.begin(), g.end(), out.values().begin());
    return out;
}

inline ParamTensor gradient(const CircuitSpec &c, const ParamTensor &params, const EncodedSample &sample,
                            const ObservableSpec &obs) {
    return gradient(c, params, sample, CompiledObservable(obs, c.n_qubits));
}

/// The layer-0 slice of `gradient`, length N*R.
inline std::vector<double> first_layer_gradient(const CircuitSpec &c, const ParamTensor &params,
                                                const EncodedSample &sample,
                                                const CompiledObservable &obs) {
    detail::check_shapes(c, params, sample, obs);
    return detail::shift_gradient(c, params, sample, obs, c.first_layer_count());
}

inline std::vector<double> first_layer_gradient(const CircuitSpec &c, const ParamTensor &params,
                                                const EncodedSample &sample, const ObservableSpec &obs) {
    return first_layer_gradient(c, params, sample, CompiledObservable(obs, c.n_qubits));
}

} // namespace vqclab
