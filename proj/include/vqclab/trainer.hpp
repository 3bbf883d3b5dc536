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

// Mini-batch Adam training of a binary VQC classifier with optional Gaussian
// noise diffusion after every optimizer step.
//
// Readout: p(y = 1 | x) = sigmoid(5 <Z_0>); loss: binary cross-entropy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqclab/ansatz.hpp"
#include "vqclab/datasets.hpp"
#include "vqclab/parallel.hpp"
#include "vqclab/regularize.hpp"
#include "vqclab/rng.hpp"

namespace vqclab {

inline constexpr double kReadoutScale = 5.0;
inline constexpr double kProbabilityFloor = 1e-12;

class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

inline double probability_from_expectation(double z0) { return sigmoid(kReadoutScale * z0); }

/// Binary cross-entropy with p clamped to [1e-12, 1 - 1e-12].
inline double loss(double probability, int label) {
    const double p = std::clamp(probability, kProbabilityFloor, 1.0 - kProbabilityFloor);
    return label == 1 ? -std::log(p) : -std::log1p(-p);
}

inline ObservableSpec readout_observable(std::size_t n_qubits) { return ObservableSpec::z(n_qubits, 0); }

inline double predict(const CircuitSpec &c, const ParamTensor &params, const EncodedSample &sample) {
    return probability_from_expectation(evaluate(c, params, sample, readout_observable(c.n_qubits)));
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
  public:
    Adam(std::size_t size, AdamConfig cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad) {
        if (params.size() != m_.size() || grad.size() != m_.size()) {
            throw std::invalid_argument("Adam: size mismatch");
        }
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
            params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
        }
    }

    std::size_t steps() const { return t_; }

  private:
    AdamConfig cfg_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Batch loss and gradient

struct BatchResult {
    double loss = 0.0;
    ParamTensor gradient; // mean over the batch of dLoss/dtheta
};

/// Mean BCE and its parameter gradient: dL/dtheta = (p - y) * 5 * dE/dtheta.
/// Per-sample terms are computed on `workers` threads and reduced in index order.
inline BatchResult batch_loss_and_gradient(const CircuitSpec &c, const ParamTensor &params,
                                           std::span<const EncodedSample> batch, const CompiledObservable &obs,
                                           std::size_t workers = 1) {
    if (batch.empty()) {
        throw std::invalid_argument("empty batch");
    }
    std::vector<double> losses(batch.size());
    std::vector<ParamTensor> grads(batch.size());
    parallel_for(batch.size(), workers, [&](std::size_t i) {
        const double e = evaluate(c, params, batch[i], obs);
        const double p = probability_from_expectation(e);
        losses[i] = loss(p, batch[i].label);
        grads[i] = gradient(c, params, batch[i], obs);
        const double chain = (p - batch[i].label) * kReadoutScale;
        for (double &g : grads[i].values()) {
            g *= chain;
        }
    });
    BatchResult out{0.0, ParamTensor::like(c)};
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.loss += losses[i];
        for (std::size_t k = 0; k < out.gradient.size(); ++k) {
            out.gradient[k] += grads[i][k];
        }
    }
    const double inv = 1.0 / double(batch.size());
    out.loss *= inv;
    for (double &g : out.gradient.values()) {
        g *= inv;
    }
    return out;
}

struct Metrics {
    double loss = 0.0;
    double accuracy = 0.0;
};

inline Metrics evaluate_metrics(const CircuitSpec &c, const ParamTensor &params, std::span<const EncodedSample> data,
                                const CompiledObservable &obs, std::size_t workers = 1) {
    if (data.empty()) {
        return {};
    }
    std::vector<double> probs(data.size());
    parallel_for(data.size(), workers, [&](std::size_t i) {
        probs[i] = probability_from_expectation(evaluate(c, params, data[i], obs));
    });
    Metrics m;
    for (std::size_t i = 0; i < data.size(); ++i) {
        m.loss += loss(probs[i], data[i].label);
        m.accuracy += ((probs[i] >= 0.5 ? 1 : 0) == data[i].label) ? 1.0 : 0.0;
    }
    m.loss /= double(data.size());
    m.accuracy /= double(data.size());
    return m;
}

// ---------------------------------------------------------------------------
// Training

struct DiffusionConfig {
    double dr_min = 1e-4;
    double dr_max = 0.02;
    DiffusionMode mode = DiffusionMode::Cumulative;
    /// Replaces the linear schedule; must cover every optimizer step.
    std::optional<DiffusionSchedule> schedule;
};

struct TrainConfig {
    double learning_rate = 1e-2;
    std::size_t batch_size = 20;
    std::size_t epochs = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::optional<DiffusionConfig> diffusion;
    InitStrategy init;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw std::invalid_argument("learning_rate must be > 0");
        }
        if (batch_size < 1) {
            throw std::invalid_argument("batch_size must be >= 1");
        }
        if (epochs < 1) {
            throw std::invalid_argument("epochs must be >= 1");
        }
        init.validate();
    }
};

struct EpochRecord {
    std::size_t epoch = 0; // 0 = before the first update
    Metrics train, valid;
};

struct TrainReport {
    std::string strategy;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    std::vector<EpochRecord> epochs; // epochs + 1 entries
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    /// Batch-mean dLoss/dtheta restricted to layer 1, one row per optimizer step.
    std::vector<std::vector<double>> first_layer_gradients;
    PriorStats prior;
    ParamTensor initial_params;
    ParamTensor final_params;
};

/// Observation points inside the loop. `after_adam` and `after_diffusion` see the
/// parameters of iteration t; `on_epoch` fires at epoch 0 and after every epoch.
struct TrainHooks {
    std::function<void(std::size_t iteration, const ParamTensor &)> after_adam;
    std::function<void(std::size_t iteration, const ParamTensor &)> after_diffusion;
    std::function<void(std::size_t epoch, const ParamTensor &)> on_epoch;
};

inline std::size_t batches_per_epoch(std::size_t n_train, std::size_t batch_size) {
    return (n_train + batch_size - 1) / batch_size;
}

inline PriorStats prior_for(const SplitDataset &data) {
    const auto flat = flattened(data.train);
    return flat.size() >= 2 ? fit_prior(flat) : PriorStats{};
}

/// Draws the initial parameters the way train() does.
inline ParamTensor initial_params(const CircuitSpec &c, const SplitDataset &data, const TrainConfig &cfg) {
    return sample_init(cfg.init, prior_for(data), c, cfg.seed);
}

inline TrainReport train(const CircuitSpec &c, const SplitDataset &data, const TrainConfig &cfg,
                         const TrainHooks &hooks = {}) {
    cfg.validate();
    if (static_cast<std::size_t>(data.train.features.cols()) > c.n_qubits) {
        throw std::invalid_argument("encoded feature dimension " + std::to_string(data.train.features.cols()) +
                                    " exceeds the circuit's " + std::to_string(c.n_qubits) + " qubits");
    }
    if (data.train.size() == 0) {
        throw std::invalid_argument("empty training split");
    }
    const auto train_set = to_samples(data.train, c.n_qubits);
    const auto valid_set = to_samples(data.valid, c.n_qubits);
    const auto test_set = to_samples(data.test, c.n_qubits);
    const CompiledObservable obs(readout_observable(c.n_qubits), c.n_qubits);

    TrainReport rep;
    rep.strategy = cfg.init.id();
    rep.seed = cfg.seed;
    rep.prior = prior_for(data);
    ParamTensor theta = sample_init(cfg.init, rep.prior, c, cfg.seed);
    rep.initial_params = theta;

    const std::size_t per_epoch = batches_per_epoch(train_set.size(), cfg.batch_size);
    const std::size_t total = per_epoch * cfg.epochs;
    std::optional<DiffusionSchedule> schedule;
    if (cfg.diffusion) {
        schedule = cfg.diffusion->schedule ? *cfg.diffusion->schedule
                                           : build_schedule(total, cfg.diffusion->dr_min, cfg.diffusion->dr_max);
        if (schedule->gamma_bar.size() < total) {
            throw std::invalid_argument("diffusion schedule shorter than the " + std::to_string(total) +
                                        " optimizer steps");
        }
    }
    RngStream noise(cfg.seed, StreamPurpose::Diffusion);
    Adam adam(theta.size(), AdamConfig{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});

    auto record_epoch = [&](std::size_t e) {
        rep.epochs.push_back({e, evaluate_metrics(c, theta, train_set, obs, cfg.workers),
                              evaluate_metrics(c, theta, valid_set, obs, cfg.workers)});
        if (hooks.on_epoch) {
            hooks.on_epoch(e, theta);
        }
    };
    record_epoch(0);

    std::vector<std::size_t> order(train_set.size());
    std::vector<EncodedSample> batch;
    std::size_t t = 0;
    for (std::size_t e = 1; e <= cfg.epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        RngStream shuffle(cfg.seed, StreamPurpose::Shuffle, {e});
        std::shuffle(order.begin(), order.end(), shuffle.engine());
        for (std::size_t b = 0; b < per_epoch; ++b, ++t) {
            batch.clear();
            for (std::size_t i = b * cfg.batch_size; i < std::min(order.size(), (b + 1) * cfg.batch_size); ++i) {
                batch.push_back(train_set[order[i]]);
            }
            const BatchResult r = batch_loss_and_gradient(c, theta, batch, obs, cfg.workers);
            if (!std::isfinite(r.loss) || !r.gradient.all_finite()) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << e << ", iteration " << t << " (loss=" << r.loss
                    << ", params finite=" << (theta.all_finite() ? "yes" : "no") << ")";
                throw TrainingError(msg.str());
            }
            rep.first_layer_gradients.emplace_back(r.gradient.values().begin(),
                                                   r.gradient.values().begin() + c.first_layer_count());
            adam.step(theta.values(), r.gradient.values());
            if (hooks.after_adam) {
                hooks.after_adam(t, theta);
            }
            if (schedule) {
                theta = diffuse(theta, noise_keep(*schedule, t, cfg.diffusion->mode), noise);
                if (hooks.after_diffusion) {
                    hooks.after_diffusion(t, theta);
                }
            }
            if (!theta.all_finite()) {
                throw TrainingError("non-finite parameters after iteration " + std::to_string(t) + " (epoch " +
                                    std::to_string(e) + ", last batch loss " + std::to_string(r.loss) + ")");
            }
        }
        record_epoch(e);
    }
    rep.iterations = t;
    const Metrics test = evaluate_metrics(c, theta, test_set, obs, cfg.workers);
    rep.test_accuracy = test.accuracy;
    rep.test_loss = test.loss;
    rep.final_params = theta;
    return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const PriorStats &p) {
    return {{"d_min", p.d_min},       {"d_max", p.d_max},         {"mean", p.mean},
            {"std", p.std},           {"beta_alpha", p.beta_alpha}, {"beta_beta", p.beta_beta},
            {"beta_defined", p.beta_defined}};
}

inline nlohmann::json to_json(const ParamTensor &t) {
    return {{"shape", {t.layers(), t.qubits(), t.rots()}},
            {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

/// Keys are emitted in sorted order.
inline nlohmann::json to_json(const TrainReport &r) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto &e : r.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train.loss},
                          {"train_accuracy", e.train.accuracy},
                          {"valid_loss", e.valid.loss},
                          {"valid_accuracy", e.valid.accuracy}});
    }
    return {{"strategy", r.strategy},
            {"seed", r.seed},
            {"iterations", r.iterations},
            {"epochs", epochs},
            {"test_accuracy", r.test_accuracy},
            {"test_loss", r.test_loss},
            {"first_layer_gradients", r.first_layer_gradients},
            {"prior", to_json(r.prior)},
            {"initial_params", to_json(r.initial_params)},
            {"final_params", to_json(r.final_params)}};
}

} // namespace vqclab
