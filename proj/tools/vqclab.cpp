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

// vqclab: sweep | select-dr | train-one | emit
//
// Exit status: 0 success, 1 configuration or I/O error, 2 some grid cells failed.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "vqclab/lab.hpp"

namespace {

using namespace vqclab;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartialFailure = 2;

struct Overrides {
    std::string config;
    std::optional<std::string> dataset, data, sweep, values, out, observable;
    std::optional<std::size_t> repeats, epochs, workers, rotations, fixed_qubits, fixed_layers, eval_batch;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> dr_candidates;
};

void add_overrides(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config, "INI experiment file");
    cmd->add_option("--dataset", o.dataset, "iris | wine | titanic | mnist");
    cmd->add_option("--data", o.data, "dataset file (directory for mnist)");
    cmd->add_option("--sweep", o.sweep, "qubits | layers");
    cmd->add_option("--values", o.values, "comma-separated sweep values");
    cmd->add_option("--repeats", o.repeats, "repetitions per cell");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--out", o.out, "output directory (default $VQCLAB_OUT or ./results)");
    cmd->add_option("--epochs", o.epochs, "training epochs; 0 measures at initialization");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_option("--rotations", o.rotations, "rotations per qubit per layer");
    cmd->add_option("--fixed-qubits", o.fixed_qubits, "qubits for a layers sweep");
    cmd->add_option("--fixed-layers", o.fixed_layers, "layers for a qubits sweep");
    cmd->add_option("--eval-batch", o.eval_batch, "evaluation samples per repeat");
    cmd->add_option("--observable", o.observable, "z0 | zero_projector");
    cmd->add_option("--dr-candidates", o.dr_candidates, "comma-separated dr_max candidates");
}

ExperimentConfig resolve(const Overrides &o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    auto set = [&](const char *key, const auto &opt) {
        if (opt) {
            std::ostringstream ss;
            ss << *opt;
            apply_setting(c, key, ss.str());
        }
    };
    set("dataset", o.dataset);
    set("data_path", o.data);
    set("sweep", o.sweep);
    set("values", o.values);
    set("repeats", o.repeats);
    set("seed", o.seed);
    set("out", o.out);
    set("epochs", o.epochs);
    set("workers", o.workers);
    set("rotations", o.rotations);
    set("fixed_qubits", o.fixed_qubits);
    set("fixed_layers", o.fixed_layers);
    set("eval_batch", o.eval_batch);
    set("observable", o.observable);
    set("dr_candidates", o.dr_candidates);
    if (c.strategies.empty()) {
        c.strategies = {{"normal", InitStrategy{InitFamily::Normal, false, std::nullopt}, false, 0.02},
                        {"normal_prior", InitStrategy{InitFamily::Normal, true, std::nullopt}, false, 0.02}};
    }
    if (c.out_dir.empty()) {
        c.out_dir = default_out_dir();
    }
    c.validate();
    return c;
}

int run_sweep_cmd(const Overrides &o) {
    const ExperimentConfig cfg = resolve(o);
    const SweepResult res = run_sweep(cfg);
    emit_all(cfg, res);
    for (const auto &cell : res.cells) {
        if (cell.failed) {
            std::cerr << "cell " << cell.strategy << " " << to_string(cfg.axis) << "=" << cell.axis_value
                      << " failed: " << cell.error << "\n";
        }
    }
    std::cout << "wrote " << res.records.size() << " records to " << (cfg.out_dir / "variance.csv").string() << "\n";
    return res.failed_cells() ? kPartialFailure : kOk;
}

int run_select_dr_cmd(const Overrides &o) {
    const ExperimentConfig cfg = resolve(o);
    const auto sel = select_dr_max(cfg);
    detail::write_file(cfg.out_dir / "dr_selection.json", to_json(sel).dump(2) + "\n");
    for (const auto &s : sel) {
        std::cout << s.strategy << ": dr_max = " << s.chosen << "\n";
    }
    return kOk;
}

struct TrainOneOptions {
    std::string dataset = "iris";
    std::optional<std::string> data;
    std::size_t qubits = 4, layers = 2, rotations = 3;
    std::string init = "uniform";
    bool prior = false;
    bool diffusion = false;
    double dr_min = 1e-4, dr_max = 0.02;
    std::string diffusion_mode = "cumulative";
    std::size_t epochs = 50, batch = 20, workers = 1;
    double lr = 1e-2;
    std::uint64_t seed = 0;
    std::optional<std::string> out;
};

int run_train_one_cmd(const TrainOneOptions &o) {
    DatasetName name;
    try {
        name = parse_dataset_name(o.dataset);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    TrainConfig cfg;
    cfg.learning_rate = o.lr;
    cfg.batch_size = o.batch;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    try {
        cfg.init = InitStrategy{parse_init_family(o.init), o.prior, std::nullopt};
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    if (o.diffusion) {
        if (o.diffusion_mode != "cumulative" && o.diffusion_mode != "per_step") {
            throw ConfigError("--diffusion-mode must be cumulative or per_step");
        }
        cfg.diffusion = DiffusionConfig{o.dr_min, o.dr_max,
                                        o.diffusion_mode == "per_step" ? DiffusionMode::PerStep
                                                                       : DiffusionMode::Cumulative,
                                        std::nullopt};
    }
    const RawDataset raw = load(name, o.data ? std::filesystem::path(*o.data) : default_data_path(name));
    const SplitDataset data = prepare(raw, derive_seed(o.seed, {static_cast<std::uint64_t>(StreamPurpose::Split)}),
                                      o.qubits);
    const CircuitSpec c = build_circuit(o.qubits, o.rotations, o.layers);
    const TrainReport rep = train(c, data, cfg);
    nlohmann::json j = to_json(rep);
    j["dataset"] = std::string(to_string(name));
    const std::string text = j.dump(2) + "\n";
    if (o.out) {
        detail::write_file(*o.out, text);
    } else {
        std::cout << text;
    }
    std::fprintf(stderr, "test accuracy %.4f after %zu epochs\n", rep.test_accuracy, o.epochs);
    return kOk;
}

int run_emit_cmd(const std::string &csv, const std::optional<std::string> &svg, std::size_t epoch) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read '" + csv + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const auto records = parse_csv(ss.str());
    const std::filesystem::path target =
        svg ? std::filesystem::path(*svg) : std::filesystem::path(csv).replace_extension(".svg");
    detail::write_file(target, to_svg(records, epoch));
    std::cout << "wrote " << target.string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Variational quantum circuit gradient-variance laboratory"};
    app.require_subcommand(1);

    Overrides sweep_opts, select_opts;
    auto *sweep = app.add_subcommand("sweep", "measure first-layer gradient variance over a qubit or layer sweep");
    add_overrides(sweep, sweep_opts);
    auto *select = app.add_subcommand("select-dr", "pick dr_max per diffusion strategy on the validation split");
    add_overrides(select, select_opts);

    TrainOneOptions train_opts;
    auto *train_one = app.add_subcommand("train-one", "train a single classifier and print its JSON report");
    train_one->add_option("--dataset", train_opts.dataset, "iris | wine | titanic | mnist");
    train_one->add_option("--data", train_opts.data, "dataset file (directory for mnist)");
    train_one->add_option("--qubits", train_opts.qubits);
    train_one->add_option("--layers", train_opts.layers);
    train_one->add_option("--rotations", train_opts.rotations);
    train_one->add_option("--init", train_opts.init, "initializer family");
    train_one->add_flag("--prior", train_opts.prior, "fit the initializer to the training data");
    train_one->add_flag("--diffusion", train_opts.diffusion, "enable noise diffusion");
    train_one->add_option("--dr-min", train_opts.dr_min);
    train_one->add_option("--dr-max", train_opts.dr_max);
    train_one->add_option("--diffusion-mode", train_opts.diffusion_mode, "cumulative | per_step");
    train_one->add_option("--epochs", train_opts.epochs);
    train_one->add_option("--batch", train_opts.batch);
    train_one->add_option("--lr", train_opts.lr);
    train_one->add_option("--seed", train_opts.seed);
    train_one->add_option("--workers", train_opts.workers);
    train_one->add_option("--out", train_opts.out, "report path (stdout when omitted)");

    std::string emit_csv;
    std::optional<std::string> emit_svg;
    std::size_t emit_epoch = 0;
    auto *emit_cmd = app.add_subcommand("emit", "redraw the SVG chart from a variance CSV");
    emit_cmd->add_option("--csv", emit_csv, "variance CSV")->required();
    emit_cmd->add_option("--svg", emit_svg, "output SVG (default: CSV path with .svg)");
    emit_cmd->add_option("--epoch", emit_epoch, "epoch to plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*sweep) {
            return run_sweep_cmd(sweep_opts);
        }
        if (*select) {
            return run_select_dr_cmd(select_opts);
        }
        if (*train_one) {
            return run_train_one_cmd(train_opts);
        }
        return run_emit_cmd(emit_csv, emit_svg, emit_epoch);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
