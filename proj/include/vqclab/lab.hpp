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

// Experiment harness: qubit/layer sweeps of the first-layer gradient variance
// over a grid of initialization/diffusion strategies, dr_max selection, and
// CSV/SVG/JSON output.

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqclab/ansatz.hpp"
#include "vqclab/datasets.hpp"
#include "vqclab/parallel.hpp"
#include "vqclab/regularize.hpp"
#include "vqclab/rng.hpp"
#include "vqclab/trainer.hpp"

namespace vqclab {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class SweepAxis { Qubits, Layers };
enum class VarianceObservable { Z0, ZeroProjector };
enum class Pooling { Pooled, PerParameter };
enum class EvalSplit { Train, Valid };

inline std::string_view to_string(SweepAxis a) { return a == SweepAxis::Qubits ? "qubits" : "layers"; }

struct StrategySpec {
    std::string name;
    InitStrategy init;
    bool diffusion = false;
    double dr_max = 0.02;
};

struct ExperimentConfig {
    DatasetName dataset = DatasetName::Iris;
    std::filesystem::path data_path;
    SweepAxis axis = SweepAxis::Qubits;
    std::vector<std::size_t> values{2, 4, 6, 8, 10};
    std::size_t fixed_qubits = 6;
    std::size_t fixed_layers = 5;
    std::size_t rotations = 3;
    EntanglerKind entangler = EntanglerKind::CnotRing;
    std::vector<StrategySpec> strategies;
    std::size_t repeats = 5;
    double dr_min = 1e-4;
    DiffusionMode diffusion_mode = DiffusionMode::Cumulative;
    std::vector<double> dr_candidates{0.01, 0.02, 0.04, 0.16, 0.20, 0.30, 0.50};
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    std::size_t epochs = 0; // 0: measure at initialization only
    double learning_rate = 1e-2;
    std::size_t batch_size = 20;
    std::size_t eval_batch = 20;
    EvalSplit eval_split = EvalSplit::Train;
    VarianceObservable observable = VarianceObservable::Z0;
    Pooling pooling = Pooling::Pooled;
    std::size_t workers = 1;
    bool write_reports = true;

    std::size_t qubits_at(std::size_t value) const { return axis == SweepAxis::Qubits ? value : fixed_qubits; }
    std::size_t layers_at(std::size_t value) const { return axis == SweepAxis::Layers ? value : fixed_layers; }

    void validate() const {
        if (values.empty()) {
            throw ConfigError("sweep values must not be empty");
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 1 || (i > 0 && values[i] <= values[i - 1])) {
                throw ConfigError("sweep values must be strictly increasing and >= 1");
            }
        }
        if (repeats < 1) {
            throw ConfigError("repeats must be >= 1");
        }
        if (rotations < 1 || fixed_qubits < 1 || fixed_layers < 1) {
            throw ConfigError("rotations, fixed_qubits and fixed_layers must be >= 1");
        }
        if (eval_batch < 1) {
            throw ConfigError("eval_batch must be >= 1");
        }
        if (strategies.empty()) {
            throw ConfigError("at least one [strategy.NAME] section is required");
        }
        std::set<std::string> names;
        for (const auto &s : strategies) {
            if (!names.insert(s.name).second) {
                throw ConfigError("duplicate strategy '" + s.name + "'");
            }
            if (s.name.empty() || s.name.find_first_of(",\"\n/") != std::string::npos) {
                throw ConfigError("strategy name '" + s.name + "' must be non-empty without , \" / or newlines");
            }
            try {
                s.init.validate();
            } catch (const std::invalid_argument &e) {
                throw ConfigError("strategy '" + s.name + "': " + e.what());
            }
            if (s.diffusion && !(dr_min > 0.0 && dr_min <= s.dr_max && s.dr_max < 1.0)) {
                throw ConfigError("strategy '" + s.name + "': need 0 < dr_min <= dr_max < 1");
            }
        }
        if (!(learning_rate > 0.0) || batch_size < 1) {
            throw ConfigError("learning_rate must be > 0 and batch_size >= 1");
        }
    }
};

/// One measured point of the first-layer gradient variance.
struct VarianceRecord {
    std::string dataset;
    std::string strategy;
    SweepAxis axis = SweepAxis::Qubits;
    std::size_t axis_value = 0;
    std::size_t epoch = 0;
    double variance = 0.0;
    std::size_t n_samples = 0; // repeats x evaluation samples
    bool failed = false;

    friend bool operator==(const VarianceRecord &a, const VarianceRecord &b) {
        const bool same_var = (std::isnan(a.variance) && std::isnan(b.variance)) || a.variance == b.variance;
        return a.dataset == b.dataset && a.strategy == b.strategy && a.axis == b.axis &&
               a.axis_value == b.axis_value && a.epoch == b.epoch && same_var && a.n_samples == b.n_samples &&
               a.failed == b.failed;
    }
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

template <class T> std::vector<T> parse_list(const std::string &text, const std::string &key) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            continue;
        }
        std::istringstream is(item);
        T v;
        if (!(is >> v) || !is.eof()) {
            throw ConfigError("'" + key + "': cannot parse '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

inline bool parse_bool(const std::string &text, const std::string &key) {
    const auto s = lower(trim(text));
    if (s == "true" || s == "yes" || s == "1" || s == "on") {
        return true;
    }
    if (s == "false" || s == "no" || s == "0" || s == "off") {
        return false;
    }
    throw ConfigError("'" + key + "': expected a boolean, got '" + text + "'");
}

template <class T> T parse_scalar(const std::string &text, const std::string &key) {
    const auto v = parse_list<T>(text, key);
    if (v.size() != 1) {
        throw ConfigError("'" + key + "': expected one value, got '" + text + "'");
    }
    return v[0];
}

inline std::filesystem::path default_data_file(DatasetName n) {
    switch (n) {
    case DatasetName::Iris: return "iris.csv";
    case DatasetName::Wine: return "wine.csv";
    case DatasetName::Titanic: return "titanic.csv";
    case DatasetName::MNIST: return "mnist";
    }
    return {};
}

} // namespace detail

/// Environment defaults: VQCLAB_DATA_DIR for dataset files, VQCLAB_OUT for results.
inline std::filesystem::path default_data_path(DatasetName n) {
    const char *dir = std::getenv("VQCLAB_DATA_DIR");
    return std::filesystem::path(dir && *dir ? dir : "data") / detail::default_data_file(n);
}

inline std::filesystem::path default_out_dir() {
    const char *dir = std::getenv("VQCLAB_OUT");
    return dir && *dir ? dir : "results";
}

/// Applies one `key = value` setting from the [experiment] section.
inline void apply_setting(ExperimentConfig &c, const std::string &key, const std::string &value) {
    using detail::parse_scalar;
    const std::string v = detail::trim(value);
    if (key == "dataset") {
        try {
            c.dataset = parse_dataset_name(v);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    } else if (key == "data_path") {
        c.data_path = v;
    } else if (key == "sweep") {
        if (v == "qubits") {
            c.axis = SweepAxis::Qubits;
        } else if (v == "layers") {
            c.axis = SweepAxis::Layers;
        } else {
            throw ConfigError("sweep must be 'qubits' or 'layers', got '" + v + "'");
        }
    } else if (key == "values") {
        c.values = detail::parse_list<std::size_t>(v, key);
    } else if (key == "fixed_qubits") {
        c.fixed_qubits = parse_scalar<std::size_t>(v, key);
    } else if (key == "fixed_layers") {
        c.fixed_layers = parse_scalar<std::size_t>(v, key);
    } else if (key == "rotations") {
        c.rotations = parse_scalar<std::size_t>(v, key);
    } else if (key == "entangler") {
        if (v == "cnot") {
            c.entangler = EntanglerKind::CnotRing;
        } else if (v == "cz") {
            c.entangler = EntanglerKind::CzRing;
        } else {
            throw ConfigError("entangler must be 'cnot' or 'cz'");
        }
    } else if (key == "repeats") {
        c.repeats = parse_scalar<std::size_t>(v, key);
    } else if (key == "dr_min") {
        c.dr_min = parse_scalar<double>(v, key);
    } else if (key == "diffusion_mode") {
        if (v == "cumulative") {
            c.diffusion_mode = DiffusionMode::Cumulative;
        } else if (v == "per_step") {
            c.diffusion_mode = DiffusionMode::PerStep;
        } else {
            throw ConfigError("diffusion_mode must be 'cumulative' or 'per_step'");
        }
    } else if (key == "dr_candidates") {
        c.dr_candidates = detail::parse_list<double>(v, key);
    } else if (key == "seed") {
        c.seed = parse_scalar<std::uint64_t>(v, key);
    } else if (key == "out") {
        c.out_dir = v;
    } else if (key == "epochs") {
        c.epochs = parse_scalar<std::size_t>(v, key);
    } else if (key == "learning_rate") {
        c.learning_rate = parse_scalar<double>(v, key);
    } else if (key == "batch_size") {
        c.batch_size = parse_scalar<std::size_t>(v, key);
    } else if (key == "eval_batch") {
        c.eval_batch = parse_scalar<std::size_t>(v, key);
    } else if (key == "eval_split") {
        if (v == "train") {
            c.eval_split = EvalSplit::Train;
        } else if (v == "valid") {
            c.eval_split = EvalSplit::Valid;
        } else {
            throw ConfigError("eval_split must be 'train' or 'valid'");
        }
    } else if (key == "observable") {
        if (v == "z0") {
            c.observable = VarianceObservable::Z0;
        } else if (v == "zero_projector") {
            c.observable = VarianceObservable::ZeroProjector;
        } else {
            throw ConfigError("observable must be 'z0' or 'zero_projector'");
        }
    } else if (key == "pooling") {
        if (v == "pooled") {
            c.pooling = Pooling::Pooled;
        } else if (v == "per_parameter") {
            c.pooling = Pooling::PerParameter;
        } else {
            throw ConfigError("pooling must be 'pooled' or 'per_parameter'");
        }
    } else if (key == "workers") {
        c.workers = parse_scalar<std::size_t>(v, key);
    } else if (key == "write_reports") {
        c.write_reports = detail::parse_bool(v, key);
    } else {
        throw ConfigError("unknown setting '" + key + "'");
    }
}

inline StrategySpec parse_strategy(const std::string &name, const boost::property_tree::ptree &section) {
    StrategySpec s;
    s.name = name;
    std::optional<double> lo, hi;
    for (const auto &[key, node] : section) {
        const std::string v = node.get_value<std::string>();
        const std::string where = "strategy." + name + "." + key;
        if (key == "family") {
            try {
                s.init.family = parse_init_family(detail::trim(v));
            } catch (const std::invalid_argument &e) {
                throw ConfigError(where + ": " + e.what());
            }
        } else if (key == "prior") {
            s.init.use_prior = detail::parse_bool(v, where);
        } else if (key == "diffusion") {
            s.diffusion = detail::parse_bool(v, where);
        } else if (key == "dr_max") {
            s.dr_max = detail::parse_scalar<double>(v, where);
        } else if (key == "uniform_low") {
            lo = detail::parse_scalar<double>(v, where);
        } else if (key == "uniform_high") {
            hi = detail::parse_scalar<double>(v, where);
        } else {
            throw ConfigError("unknown setting '" + where + "'");
        }
    }
    if (lo.has_value() != hi.has_value()) {
        throw ConfigError("strategy." + name + ": uniform_low and uniform_high go together");
    }
    if (lo) {
        s.init.uniform_range = std::pair{*lo, *hi};
    }
    return s;
}

/// INI document: an [experiment] section plus one [strategy.NAME] section per grid entry.
inline ExperimentConfig parse_config_text(const std::string &text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    ExperimentConfig c;
    for (const auto &[section, body] : tree) {
        if (section == "experiment") {
            for (const auto &[key, node] : body) {
                apply_setting(c, key, node.get_value<std::string>());
            }
        } else if (section.rfind("strategy.", 0) == 0) {
            c.strategies.push_back(parse_strategy(section.substr(9), body));
        } else {
            throw ConfigError("unknown section [" + section + "]");
        }
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Variance estimation

/// Population variance; values are sorted first so the result does not depend
/// on their order.
inline double pooled_variance(std::vector<double> values) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double mean = sum / double(values.size());
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        sq[i] = (values[i] - mean) * (values[i] - mean);
    }
    std::sort(sq.begin(), sq.end());
    double acc = 0.0;
    for (double v : sq) {
        acc += v;
    }
    return acc / double(values.size());
}

/// rows[sample][parameter] -> variance of each parameter over samples, averaged.
inline double per_parameter_variance(const std::vector<std::vector<double>> &rows) {
    if (rows.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t k = rows.front().size();
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> col;
        col.reserve(rows.size());
        for (const auto &r : rows) {
            col.push_back(r.at(j));
        }
        acc += pooled_variance(std::move(col));
    }
    return acc / double(k);
}

inline double gradient_variance(const std::vector<std::vector<double>> &rows, Pooling pooling) {
    if (pooling == Pooling::PerParameter) {
        return per_parameter_variance(rows);
    }
    std::vector<double> flat;
    for (const auto &r : rows) {
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return pooled_variance(std::move(flat));
}

inline ObservableSpec variance_observable(VarianceObservable o, std::size_t n_qubits) {
    return o == VarianceObservable::Z0 ? ObservableSpec::z(n_qubits, 0) : ObservableSpec::zero_projector(n_qubits);
}

/// Seed of one (strategy, axis value, repeat) run; independent of grid order.
inline std::uint64_t job_seed(std::uint64_t base, const std::string &strategy, std::size_t axis_value,
                              std::size_t repeat) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char ch : strategy) {
        h = (h ^ ch) * 1099511628211ull;
    }
    return derive_seed(base, {h, axis_value, repeat});
}

inline TrainConfig train_config_for(const ExperimentConfig &cfg, const StrategySpec &s, std::uint64_t seed) {
    TrainConfig t;
    t.learning_rate = cfg.learning_rate;
    t.batch_size = cfg.batch_size;
    t.epochs = std::max<std::size_t>(cfg.epochs, 1);
    t.init = s.init;
    t.seed = seed;
    if (s.diffusion) {
        t.diffusion = DiffusionConfig{cfg.dr_min, s.dr_max, cfg.diffusion_mode, std::nullopt};
    }
    return t;
}

struct RunOutput {
    // gradients[epoch][sample][parameter] of dE/dtheta over layer-1 parameters
    std::vector<std::vector<std::vector<double>>> gradients;
    std::optional<TrainReport> report;
};

/// Initializes (and trains when cfg.epochs > 0) one circuit, recording the
/// evaluation-batch first-layer gradients at epoch 0 and after every epoch.
inline RunOutput run_single(const ExperimentConfig &cfg, const StrategySpec &s, const SplitDataset &data,
                            std::size_t n_qubits, std::size_t n_layers, std::uint64_t seed) {
    const CircuitSpec c = build_circuit(n_qubits, cfg.rotations, n_layers, {}, cfg.entangler);
    const Split &eval_split = cfg.eval_split == EvalSplit::Train ? data.train : data.valid;
    auto eval = to_samples(eval_split, n_qubits);
    eval.resize(std::min(eval.size(), cfg.eval_batch));
    if (eval.empty()) {
        throw std::invalid_argument("evaluation split is empty");
    }
    const CompiledObservable obs(variance_observable(cfg.observable, n_qubits), n_qubits);
    RunOutput out;
    auto capture = [&](std::size_t, const ParamTensor &p) {
        std::vector<std::vector<double>> rows;
        rows.reserve(eval.size());
        for (const auto &smp : eval) {
            rows.push_back(first_layer_gradient(c, p, smp, obs));
        }
        out.gradients.push_back(std::move(rows));
    };
    const TrainConfig tc = train_config_for(cfg, s, seed);
    if (cfg.epochs == 0) {
        capture(0, initial_params(c, data, tc));
    } else {
        TrainHooks hooks;
        hooks.on_epoch = capture;
        out.report = train(c, data, tc, hooks);
    }
    return out;
}

struct CellResult {
    std::string strategy;
    std::size_t axis_value = 0;
    bool failed = false;
    std::string error;
    std::vector<std::vector<double>> per_repeat; // [repeat][epoch] variance of that repeat alone
    std::vector<double> variance;                // [epoch], pooled over repeats
    std::size_t n_samples = 0;
};

struct RunReport {
    std::string strategy;
    std::size_t axis_value = 0;
    std::size_t repeat = 0;
    TrainReport report;
};

struct SweepResult {
    std::vector<VarianceRecord> records;
    std::vector<CellResult> cells;
    std::vector<RunReport> reports;
    std::size_t failed_cells() const {
        return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto &c) { return c.failed; }));
    }
};

/// Loads the dataset once; a load failure marks every cell failed.
inline SweepResult run_sweep(const ExperimentConfig &cfg, const RawDataset *preloaded = nullptr) {
    cfg.validate();
    SweepResult res;
    const std::string ds(to_string(cfg.dataset));
    std::optional<RawDataset> raw_storage;
    std::string load_error;
    const RawDataset *raw = preloaded;
    if (!raw) {
        try {
            raw_storage = load(cfg.dataset, cfg.data_path.empty() ? default_data_path(cfg.dataset) : cfg.data_path);
            raw = &*raw_storage;
        } catch (const std::exception &e) {
            load_error = e.what();
        }
    }

    // Encodings depend on the qubit count only.
    std::map<std::size_t, SplitDataset> encoded;
    std::map<std::size_t, std::string> encode_errors;
    const std::uint64_t split_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(StreamPurpose::Split)});
    for (std::size_t v : cfg.values) {
        const std::size_t n = cfg.qubits_at(v);
        if (encoded.count(n) || encode_errors.count(n)) {
            continue;
        }
        if (!raw) {
            encode_errors[n] = load_error;
            continue;
        }
        try {
            encoded.emplace(n, prepare(*raw, split_seed, n));
        } catch (const std::exception &e) {
            encode_errors[n] = e.what();
        }
    }

    struct Job {
        std::size_t strategy, value, repeat;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        for (std::size_t v = 0; v < cfg.values.size(); ++v) {
            for (std::size_t r = 0; r < cfg.repeats; ++r) {
                jobs.push_back({s, v, r});
            }
        }
    }
    std::vector<std::optional<RunOutput>> outputs(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
        const auto &job = jobs[j];
        const auto &strat = cfg.strategies[job.strategy];
        const std::size_t value = cfg.values[job.value];
        const std::size_t n = cfg.qubits_at(value);
        if (auto it = encode_errors.find(n); it != encode_errors.end()) {
            errors[j] = it->second;
            return;
        }
        try {
            outputs[j] = run_single(cfg, strat, encoded.at(n), n, cfg.layers_at(value),
                                    job_seed(cfg.seed, strat.name, value, job.repeat));
        } catch (const std::exception &e) {
            errors[j] = e.what();
        }
    });

    const std::size_t epochs = cfg.epochs + 1;
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        for (std::size_t v = 0; v < cfg.values.size(); ++v) {
            CellResult cell;
            cell.strategy = cfg.strategies[s].name;
            cell.axis_value = cfg.values[v];
            const std::size_t first = (s * cfg.values.size() + v) * cfg.repeats;
            for (std::size_t r = 0; r < cfg.repeats; ++r) {
                if (!outputs[first + r]) {
                    cell.failed = true;
                    cell.error = errors[first + r];
                    break;
                }
            }
            if (!cell.failed) {
                cell.variance.resize(epochs);
                cell.per_repeat.assign(cfg.repeats, std::vector<double>(epochs));
                for (std::size_t e = 0; e < epochs; ++e) {
                    std::vector<std::vector<double>> rows;
                    for (std::size_t r = 0; r < cfg.repeats; ++r) {
                        const auto &g = outputs[first + r]->gradients.at(e);
                        cell.per_repeat[r][e] = gradient_variance(g, cfg.pooling);
                        rows.insert(rows.end(), g.begin(), g.end());
                    }
                    cell.n_samples = rows.size();
                    cell.variance[e] = gradient_variance(rows, cfg.pooling);
                }
                for (std::size_t r = 0; r < cfg.repeats; ++r) {
                    if (outputs[first + r]->report) {
                        res.reports.push_back({cell.strategy, cell.axis_value, r, *outputs[first + r]->report});
                    }
                }
                for (std::size_t e = 0; e < epochs; ++e) {
                    res.records.push_back(
                        {ds, cell.strategy, cfg.axis, cell.axis_value, e, cell.variance[e], cell.n_samples, false});
                }
            } else {
                res.records.push_back({ds, cell.strategy, cfg.axis, cell.axis_value, 0,
                                       std::numeric_limits<double>::quiet_NaN(), 0, true});
            }
            res.cells.push_back(std::move(cell));
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// dr_max selection

struct DrSelection {
    std::string strategy;
    std::vector<double> candidates;
    std::vector<double> mean_variance;
    double chosen = 0.0;
};

/// Argmax of the mean curve value; ties go to the smaller dr_max.
inline double choose_dr_max(const std::vector<double> &candidates, const std::vector<std::vector<double>> &curves) {
    if (candidates.empty()) {
        throw std::invalid_argument("no dr_max candidates");
    }
    if (curves.size() != candidates.size()) {
        throw std::invalid_argument("one curve per candidate is required");
    }
    std::optional<std::size_t> best;
    double best_mean = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (curves[i].empty()) {
            continue;
        }
        double m = 0.0;
        for (double v : curves[i]) {
            m += v;
        }
        m /= double(curves[i].size());
        if (std::isnan(m)) {
            continue;
        }
        if (!best || m > best_mean || (m == best_mean && candidates[i] < candidates[*best])) {
            best = i;
            best_mean = m;
        }
    }
    if (!best) {
        throw std::runtime_error("every dr_max candidate failed");
    }
    return candidates[*best];
}

/// For every diffusion strategy: sweep each candidate dr_max, measuring on the
/// validation split, and keep the one with the largest mean variance.
inline std::vector<DrSelection> select_dr_max(const ExperimentConfig &cfg, const RawDataset *preloaded = nullptr) {
    if (cfg.dr_candidates.size() < 2) {
        throw ConfigError("select-dr needs at least two dr_max candidates");
    }
    std::vector<DrSelection> out;
    for (const auto &s : cfg.strategies) {
        if (!s.diffusion) {
            continue;
        }
        ExperimentConfig sub = cfg;
        sub.eval_split = EvalSplit::Valid;
        sub.strategies.clear();
        for (double dr : cfg.dr_candidates) {
            StrategySpec cand = s;
            cand.dr_max = dr;
            std::ostringstream name;
            name << s.name << "@" << dr;
            cand.name = name.str();
            sub.strategies.push_back(cand);
        }
        const auto res = run_sweep(sub, preloaded);
        DrSelection sel;
        sel.strategy = s.name;
        sel.candidates = cfg.dr_candidates;
        std::vector<std::vector<double>> curves(cfg.dr_candidates.size());
        for (std::size_t i = 0; i < cfg.dr_candidates.size(); ++i) {
            for (const auto &rec : res.records) {
                if (rec.strategy == sub.strategies[i].name && !rec.failed) {
                    curves[i].push_back(rec.variance);
                }
            }
            double m = std::numeric_limits<double>::quiet_NaN();
            if (!curves[i].empty()) {
                m = 0.0;
                for (double v : curves[i]) {
                    m += v;
                }
                m /= double(curves[i].size());
            }
            sel.mean_variance.push_back(m);
        }
        sel.chosen = choose_dr_max(cfg.dr_candidates, curves);
        out.push_back(std::move(sel));
    }
    if (out.empty()) {
        throw ConfigError("select-dr needs at least one strategy with diffusion = true");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Emission

inline constexpr std::string_view kCsvHeader = "dataset,strategy,axis,axis_value,epoch,variance,n_samples";

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void ensure_dir(const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
    }
}

inline void write_file(const std::filesystem::path &path, const std::string &body) {
    if (path.has_parent_path()) {
        ensure_dir(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << body) || !out.flush()) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

} // namespace detail

/// Failed cells carry the variance field "failed".
inline std::string to_csv(const std::vector<VarianceRecord> &records) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto &r : records) {
        out += r.dataset + ',' + r.strategy + ',' + std::string(to_string(r.axis)) + ',' +
               std::to_string(r.axis_value) + ',' + std::to_string(r.epoch) + ',' +
               (r.failed ? std::string("failed") : detail::format_double(r.variance)) + ',' +
               std::to_string(r.n_samples) + '\n';
    }
    return out;
}

inline std::vector<VarianceRecord> parse_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::runtime_error("variance CSV: unexpected header");
    }
    std::vector<VarianceRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) {
            f.push_back(item);
        }
        if (f.size() != 7) {
            throw std::runtime_error("variance CSV line " + std::to_string(lineno) + ": expected 7 fields");
        }
        try {
            VarianceRecord r;
            r.dataset = f[0];
            r.strategy = f[1];
            if (f[2] == "qubits") {
                r.axis = SweepAxis::Qubits;
            } else if (f[2] == "layers") {
                r.axis = SweepAxis::Layers;
            } else {
                throw std::invalid_argument("axis");
            }
            r.axis_value = std::stoul(f[3]);
            r.epoch = std::stoul(f[4]);
            if (f[5] == "failed") {
                r.failed = true;
                r.variance = std::numeric_limits<double>::quiet_NaN();
            } else {
                r.variance = std::stod(f[5]);
            }
            r.n_samples = std::stoul(f[6]);
            out.push_back(std::move(r));
        } catch (const std::logic_error &) {
            throw std::runtime_error("variance CSV line " + std::to_string(lineno) + ": malformed field");
        }
    }
    return out;
}

/// log10(variance) against the sweep value at one epoch, one polyline per strategy.
inline std::string to_svg(const std::vector<VarianceRecord> &records, std::size_t epoch = 0) {
    if (records.empty()) {
        throw std::invalid_argument("svg: no records");
    }
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto &r : records) {
        if (std::find(order.begin(), order.end(), r.strategy) == order.end()) {
            order.push_back(r.strategy);
        }
        if (!r.failed && r.epoch == epoch && r.variance > 0.0) {
            series[r.strategy].emplace_back(double(r.axis_value), std::log10(r.variance));
        }
    }
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto &[name, pts] : series) {
        for (auto [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x0 > x1) {
        x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    }
    if (x1 == x0) {
        x1 = x0 + 1;
    }
    if (y1 == y0) {
        y1 = y0 + 1;
    }
    const double W = 640, H = 400, L = 70, R = 160, T = 20, B = 50;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return T + (y1 - y) / (y1 - y0) * (H - T - B); };
    static constexpr const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << to_string(records.front().axis) << "</text>\n";
    s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">log10 variance</text>\n";
    for (double y : {y0, y1}) {
        s << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << y
          << "</text>\n";
    }
    for (double x : {x0, x1}) {
        s << "<text x=\"" << px(x) << "\" y=\"" << H - B + 14 << "\" text-anchor=\"middle\" font-size=\"10\">" << x
          << "</text>\n";
    }
    std::size_t k = 0;
    for (const auto &name : order) {
        const char *color = kColors[k % 8];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (auto [x, y] : series[name]) {
            s << (first ? "" : " ") << px(x) << ',' << py(y);
            first = false;
        }
        s << "\"/>\n";
        s << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 14 + 16 * double(k) << "\" font-size=\"11\" fill=\""
          << color << "\">" << name << "</text>\n";
        ++k;
    }
    s << "</svg>\n";
    return s.str();
}

inline nlohmann::json to_json(const RunReport &r, const std::string &dataset, SweepAxis axis) {
    nlohmann::json j = to_json(r.report);
    j["strategy"] = r.strategy;
    j["dataset"] = dataset;
    j["axis"] = std::string(to_string(axis));
    j["axis_value"] = r.axis_value;
    j["repeat"] = r.repeat;
    return j;
}

inline nlohmann::json to_json(const std::vector<DrSelection> &sel) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto &s : sel) {
        out.push_back({{"strategy", s.strategy},
                       {"candidates", s.candidates},
                       {"mean_variance", s.mean_variance},
                       {"chosen", s.chosen}});
    }
    return out;
}

inline std::string report_filename(const RunReport &r, SweepAxis axis) {
    return r.strategy + "_" + std::string(to_string(axis)) + std::to_string(r.axis_value) + "_r" +
           std::to_string(r.repeat) + ".json";
}

enum class EmitFormat { Csv, Json, Svg };

/// Writes variance.csv / variance.svg / reports/*.json under `dir`.
inline void emit(const std::filesystem::path &dir, const std::vector<VarianceRecord> &records,
                 const std::vector<RunReport> &reports, EmitFormat format, SweepAxis axis = SweepAxis::Qubits) {
    detail::ensure_dir(dir);
    switch (format) {
    case EmitFormat::Csv: detail::write_file(dir / "variance.csv", to_csv(records)); break;
    case EmitFormat::Svg: detail::write_file(dir / "variance.svg", to_svg(records)); break;
    case EmitFormat::Json:
        for (const auto &r : reports) {
            const std::string ds = records.empty() ? std::string() : records.front().dataset;
            detail::write_file(dir / "reports" / report_filename(r, axis), to_json(r, ds, axis).dump(2) + "\n");
        }
        break;
    }
}

/// Records, SVG and (when enabled) per-run reports for a finished sweep.
inline void emit_all(const ExperimentConfig &cfg, const SweepResult &res) {
    const auto dir = cfg.out_dir.empty() ? default_out_dir() : cfg.out_dir;
    emit(dir, res.records, res.reports, EmitFormat::Csv, cfg.axis);
    emit(dir, res.records, res.reports, EmitFormat::Svg, cfg.axis);
    if (cfg.write_reports) {
        emit(dir, res.records, res.reports, EmitFormat::Json, cfg.axis);
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto &c : res.cells) {
        if (c.failed) {
            failures.push_back({{"strategy", c.strategy}, {"axis_value", c.axis_value}, {"error", c.error}});
        }
    }
    if (!failures.empty()) {
        detail::write_file(dir / "failures.json", failures.dump(2) + "\n");
    }
}

} // namespace vqclab
