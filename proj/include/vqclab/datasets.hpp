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

// Benchmark datasets for binary VQC classification.
//
// Pipeline: load -> binarize_and_split -> fit_encoder (train only) -> encode.
// Encoded features are angles in [0, pi], at most n_qubits per sample.
//
// Files:
//   iris, wine, titanic  CSV with a header row; empty fields are missing values.
//   mnist                directory holding train-images-idx3-ubyte and
//                        train-labels-idx1-ubyte (big-endian IDX, unsigned bytes).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/tokenizer.hpp>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vqclab/ansatz.hpp"
#include "vqclab/rng.hpp"

namespace vqclab {

class DatasetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class DatasetName { Iris, Wine, Titanic, MNIST };

struct SplitSizes {
    std::size_t train = 0;
    std::size_t valid = 0;
    std::size_t test = 0;
    std::size_t total() const { return train + valid + test; }
    friend bool operator==(const SplitSizes &, const SplitSizes &) = default;
};

/// Published size of each benchmark and the binary-task split sizes.
struct DatasetInfo {
    DatasetName name;
    std::string_view id;
    std::size_t instances;
    std::size_t features;
    std::size_t classes;
    SplitSizes splits;
};

inline constexpr std::array<DatasetInfo, 4> kDatasets{{
    {DatasetName::Iris, "iris", 150, 4, 3, {60, 20, 20}},
    {DatasetName::Wine, "wine", 178, 13, 3, {80, 20, 30}},
    {DatasetName::Titanic, "titanic", 891, 11, 2, {320, 80, 179}},
    {DatasetName::MNIST, "mnist", 60000, 784, 10, {320, 80, 400}},
}};

inline const DatasetInfo &dataset_info(DatasetName n) {
    for (const auto &d : kDatasets) {
        if (d.name == n) {
            return d;
        }
    }
    throw std::invalid_argument("unknown dataset");
}

inline DatasetName parse_dataset_name(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const auto &d : kDatasets) {
        if (d.id == lower) {
            return d.name;
        }
    }
    throw std::invalid_argument("unknown dataset '" + std::string(s) + "'");
}

inline std::string_view to_string(DatasetName n) { return dataset_info(n).id; }

/// Raw rows are kept in single precision: MNIST alone is 47M values.
using RawMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RawDataset {
    DatasetName name = DatasetName::Iris;
    RawMatrix features; // NaN marks a missing value
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::size_t original_features = 0; // columns in the source file, label excluded

    std::size_t instances() const { return labels.size(); }
    std::size_t classes() const { return std::set<int>(labels.begin(), labels.end()).size(); }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based source line of each row
};

inline CsvTable read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw DatasetError("cannot open '" + path.string() + "'");
    }
    using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
    const boost::escaped_list_separator<char> sep('\\', ',', '"');
    auto split = [&](const std::string &line, std::size_t lineno) {
        std::vector<std::string> out;
        try {
            Tokenizer tok(line, sep);
            for (const auto &f : tok) {
                out.push_back(trim(f));
            }
        } catch (const boost::escaped_list_error &e) {
            throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": malformed quoting (" +
                               e.what() + ")");
        }
        return out;
    };

    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        if (t.header.empty()) {
            t.header = split(line, lineno);
            continue;
        }
        auto fields = split(line, lineno);
        if (fields.size() != t.header.size()) {
            throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (t.header.empty()) {
        throw DatasetError("'" + path.string() + "' is empty (a header row is required)");
    }
    return t;
}

/// Parses a numeric field; empty means missing (NaN).
inline float parse_number(const std::string &field, const std::filesystem::path &path, std::size_t lineno,
                          std::string_view column) {
    if (field.empty()) {
        return std::numeric_limits<float>::quiet_NaN();
    }
    double v = 0.0;
    const char *end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": column '" + std::string(column) +
                           "' is not numeric: '" + field + "'");
    }
    return static_cast<float>(v);
}

inline std::size_t find_column(const CsvTable &t, std::initializer_list<std::string_view> names) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const auto h = lower(t.header[c]);
        for (auto n : names) {
            if (h == n) {
                return c;
            }
        }
    }
    return t.header.size();
}

/// Integer labels; non-numeric labels are numbered in sorted order of their text.
inline std::vector<int> parse_labels(const CsvTable &t, std::size_t col, const std::filesystem::path &path) {
    bool numeric = true;
    for (const auto &r : t.rows) {
        int v;
        auto [ptr, ec] = std::from_chars(r[col].data(), r[col].data() + r[col].size(), v);
        if (r[col].empty() || ec != std::errc{} || ptr != r[col].data() + r[col].size()) {
            numeric = false;
            break;
        }
    }
    std::vector<int> labels;
    labels.reserve(t.rows.size());
    if (numeric) {
        for (const auto &r : t.rows) {
            labels.push_back(std::stoi(r[col]));
        }
        return labels;
    }
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i][col].empty()) {
            throw DatasetError(path.string() + ":" + std::to_string(t.line_numbers[i]) + ": missing label");
        }
        ids.emplace(t.rows[i][col], 0);
    }
    int next = 0;
    for (auto &kv : ids) {
        kv.second = next++;
    }
    for (const auto &r : t.rows) {
        labels.push_back(ids.at(r[col]));
    }
    return labels;
}

inline RawDataset load_tabular(DatasetName name, const std::filesystem::path &path) {
    const CsvTable t = read_csv(path);
    std::size_t label_col = find_column(t, {"species", "class", "label", "target", "variety"});
    if (label_col == t.header.size()) {
        label_col = t.header.size() - 1;
    }
    RawDataset d;
    d.name = name;
    d.original_features = t.header.size() - 1;
    d.labels = parse_labels(t, label_col, path);
    d.features.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(d.original_features));
    for (std::size_t c = 0, out = 0; c < t.header.size(); ++c) {
        if (c == label_col) {
            continue;
        }
        d.feature_names.push_back(t.header[c]);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out)) =
                parse_number(t.rows[i][c], path, t.line_numbers[i], t.header[c]);
        }
        ++out;
    }
    return d;
}

// Drops the identifier columns (PassengerId, Name, Ticket, Cabin); Sex and
// Embarked become small integers; a missing Age or Embarked stays NaN and is
// imputed later from the training split.
inline RawDataset load_titanic(const std::filesystem::path &path) {
    const CsvTable t = read_csv(path);
    const std::size_t survived = find_column(t, {"survived"});
    if (survived == t.header.size()) {
        throw DatasetError(path.string() + ": missing 'Survived' column");
    }
    const std::vector<std::string_view> kept = {"pclass", "sex", "age", "sibsp", "parch", "fare", "embarked"};
    std::vector<std::size_t> cols;
    for (auto name : kept) {
        const std::size_t c = find_column(t, {name});
        if (c == t.header.size()) {
            throw DatasetError(path.string() + ": missing '" + std::string(name) + "' column");
        }
        cols.push_back(c);
    }
    RawDataset d;
    d.name = DatasetName::Titanic;
    d.original_features = t.header.size() - 1;
    d.features.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto &r = t.rows[i];
        const std::size_t ln = t.line_numbers[i];
        const auto label = parse_number(r[survived], path, ln, "Survived");
        if (std::isnan(label)) {
            throw DatasetError(path.string() + ":" + std::to_string(ln) + ": missing label");
        }
        d.labels.push_back(static_cast<int>(label));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::string &f = r[cols[k]];
            float v;
            if (kept[k] == "sex") {
                const auto s = lower(f);
                if (s == "male") {
                    v = 0.0f;
                } else if (s == "female") {
                    v = 1.0f;
                } else {
                    throw DatasetError(path.string() + ":" + std::to_string(ln) + ": unknown Sex '" + f + "'");
                }
            } else if (kept[k] == "embarked") {
                if (f.empty()) {
                    v = std::numeric_limits<float>::quiet_NaN();
                } else if (f == "S") {
                    v = 0.0f;
                } else if (f == "C") {
                    v = 1.0f;
                } else if (f == "Q") {
                    v = 2.0f;
                } else {
                    throw DatasetError(path.string() + ":" + std::to_string(ln) + ": unknown Embarked '" + f + "'");
                }
            } else {
                v = parse_number(f, path, ln, t.header[cols[k]]);
            }
            d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
        }
    }
    for (std::size_t c : cols) {
        d.feature_names.push_back(t.header[c]);
    }
    return d;
}

inline std::vector<unsigned char> read_idx(const std::filesystem::path &path, std::uint32_t magic,
                                           std::vector<std::uint32_t> &dims) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError("cannot open '" + path.string() + "'");
    }
    auto read_be32 = [&]() {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char *>(b), 4)) {
            throw DatasetError(path.string() + ": truncated IDX header");
        }
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
               std::uint32_t(b[3]);
    };
    const std::uint32_t got = read_be32();
    if (got != magic) {
        char buf[64];
        std::snprintf(buf, sizeof buf, ": bad IDX magic 0x%08x (expected 0x%08x)", got, magic);
        throw DatasetError(path.string() + buf);
    }
    dims.assign(magic & 0xff, 0);
    std::size_t count = 1;
    for (auto &d : dims) {
        d = read_be32();
        count *= d;
    }
    std::vector<unsigned char> data(count);
    if (!in.read(reinterpret_cast<char *>(data.data()), static_cast<std::streamsize>(count))) {
        throw DatasetError(path.string() + ": truncated IDX payload");
    }
    return data;
}

inline RawDataset load_mnist(const std::filesystem::path &dir) {
    std::vector<std::uint32_t> idims, ldims;
    const auto images = read_idx(dir / "train-images-idx3-ubyte", 0x00000803, idims);
    const auto labels = read_idx(dir / "train-labels-idx1-ubyte", 0x00000801, ldims);
    if (idims[0] != ldims[0]) {
        throw DatasetError("MNIST image count " + std::to_string(idims[0]) + " != label count " +
                           std::to_string(ldims[0]));
    }
    const std::size_t n = idims[0];
    const std::size_t pixels = std::size_t{idims[1]} * idims[2];
    RawDataset d;
    d.name = DatasetName::MNIST;
    d.original_features = pixels;
    d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels));
    for (std::size_t i = 0; i < n * pixels; ++i) {
        d.features.data()[i] = static_cast<float>(images[i]);
    }
    d.labels.assign(labels.begin(), labels.end());
    for (std::size_t p = 0; p < pixels; ++p) {
        d.feature_names.push_back("px" + std::to_string(p));
    }
    return d;
}

} // namespace detail

/// Loads one benchmark and checks it against its published dimensions.
inline RawDataset load(DatasetName name, const std::filesystem::path &path) {
    if (!std::filesystem::exists(path)) {
        throw DatasetError("dataset path '" + path.string() + "' does not exist");
    }
    RawDataset d;
    switch (name) {
    case DatasetName::Iris:
    case DatasetName::Wine: d = detail::load_tabular(name, path); break;
    case DatasetName::Titanic: d = detail::load_titanic(path); break;
    case DatasetName::MNIST: d = detail::load_mnist(path); break;
    }
    const auto &info = dataset_info(name);
    if (d.instances() != info.instances || d.original_features != info.features || d.classes() != info.classes) {
        throw DatasetError(std::string(info.id) + ": expected " + std::to_string(info.instances) + "x" +
                           std::to_string(info.features) + " with " + std::to_string(info.classes) +
                           " classes, found " + std::to_string(d.instances()) + "x" +
                           std::to_string(d.original_features) + " with " + std::to_string(d.classes()));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Splitting

struct Split {
    Eigen::MatrixXd features; // rows are samples
    std::vector<int> labels;  // 0 or 1
    std::vector<std::size_t> source_rows; // row index in the raw dataset
    std::size_t size() const { return labels.size(); }
};

struct DataSplits {
    Split train, valid, test;
};

/// Keeps the two smallest labels (relabelled 0/1), shuffles with `seed`, and cuts
/// train/valid/test in the published proportions.
inline DataSplits binarize_and_split(const RawDataset &raw, std::uint64_t seed,
                                     std::optional<SplitSizes> sizes = std::nullopt) {
    const std::set<int> classes(raw.labels.begin(), raw.labels.end());
    if (classes.size() < 2) {
        throw DatasetError("binarize: need at least two classes");
    }
    const int first = *classes.begin();
    const int second = *std::next(classes.begin());
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < raw.labels.size(); ++i) {
        if (raw.labels[i] == first || raw.labels[i] == second) {
            kept.push_back(i);
        }
    }
    const SplitSizes sz = sizes.value_or(dataset_info(raw.name).splits);
    if (kept.size() < sz.total()) {
        throw DatasetError(std::string(to_string(raw.name)) + ": only " + std::to_string(kept.size()) +
                           " instances in the first two classes, need " + std::to_string(sz.total()));
    }
    RngStream rng(seed, StreamPurpose::Split);
    std::shuffle(kept.begin(), kept.end(), rng.engine());

    auto take = [&](std::size_t from, std::size_t count) {
        Split s;
        s.features.resize(static_cast<Eigen::Index>(count), raw.features.cols());
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t src = kept[from + k];
            s.features.row(static_cast<Eigen::Index>(k)) =
                raw.features.row(static_cast<Eigen::Index>(src)).cast<double>();
            s.labels.push_back(raw.labels[src] == first ? 0 : 1);
            s.source_rows.push_back(src);
        }
        return s;
    };
    return DataSplits{take(0, sz.train), take(sz.train, sz.valid), take(sz.train + sz.valid, sz.test)};
}

// ---------------------------------------------------------------------------
// Encoding

struct EncoderState {
    Eigen::VectorXd medians;    // per raw column, for missing values
    Eigen::VectorXd center;     // per raw column; zero when no reduction
    Eigen::MatrixXd components; // raw_cols x out_dims; identity when no reduction
    Eigen::VectorXd lo, hi;     // per output dimension, train extrema
    bool reduced = false;

    std::size_t out_dims() const { return static_cast<std::size_t>(components.cols()); }
};

namespace detail {

inline Eigen::MatrixXd impute(const Eigen::MatrixXd &x, const Eigen::VectorXd &medians) {
    Eigen::MatrixXd out = x;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            if (std::isnan(out(i, j))) {
                out(i, j) = medians(j);
            }
        }
    }
    return out;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

/// Fits missing-value medians, an optional principal-component projection to
/// min(features, n_qubits) dimensions, and per-dimension [0, pi] scaling.
inline EncoderState fit_encoder(const Eigen::MatrixXd &train, std::size_t n_qubits) {
    if (train.rows() == 0 || train.cols() == 0) {
        throw DatasetError("fit_encoder: empty training data");
    }
    if (n_qubits < 1) {
        throw std::invalid_argument("fit_encoder: n_qubits must be >= 1");
    }
    const auto cols = static_cast<std::size_t>(train.cols());
    EncoderState st;
    st.medians.resize(train.cols());
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        std::vector<double> present;
        for (Eigen::Index i = 0; i < train.rows(); ++i) {
            if (!std::isnan(train(i, j))) {
                present.push_back(train(i, j));
            }
        }
        st.medians(j) = detail::median_of(std::move(present));
    }
    const Eigen::MatrixXd x = detail::impute(train, st.medians);

    if (cols <= n_qubits) {
        st.center = Eigen::VectorXd::Zero(train.cols());
        st.components = Eigen::MatrixXd::Identity(train.cols(), train.cols());
    } else {
        st.reduced = true;
        st.center = x.colwise().mean().transpose();
        const Eigen::MatrixXd centered = x.rowwise() - st.center.transpose();
        const Eigen::MatrixXd cov = centered.transpose() * centered / double(x.rows());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        const auto k = static_cast<Eigen::Index>(n_qubits);
        // Eigenvalues ascend; take the last k columns in descending order.
        st.components.resize(train.cols(), k);
        for (Eigen::Index c = 0; c < k; ++c) {
            Eigen::VectorXd v = eig.eigenvectors().col(train.cols() - 1 - c);
            Eigen::Index arg;
            v.cwiseAbs().maxCoeff(&arg);
            if (v(arg) < 0) {
                v = -v;
            }
            st.components.col(c) = v;
        }
    }
    const Eigen::MatrixXd z = (x.rowwise() - st.center.transpose()) * st.components;
    st.lo = z.colwise().minCoeff().transpose();
    st.hi = z.colwise().maxCoeff().transpose();
    return st;
}

/// Angles in [0, pi]; values outside the train range are clipped and a
/// constant training dimension maps to 0.
inline Eigen::MatrixXd encode(const EncoderState &st, const Eigen::MatrixXd &features) {
    if (features.cols() != st.medians.size()) {
        throw std::invalid_argument("encode: feature count does not match the fitted encoder");
    }
    const Eigen::MatrixXd x = detail::impute(features, st.medians);
    Eigen::MatrixXd z = (x.rowwise() - st.center.transpose()) * st.components;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double range = st.hi(j) - st.lo(j);
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            z(i, j) = range > 0.0 ? std::clamp((z(i, j) - st.lo(j)) / range * std::numbers::pi, 0.0, std::numbers::pi)
                                  : 0.0;
        }
    }
    return z;
}

struct SplitDataset {
    Split train, valid, test; // encoded angles
    EncoderState encoder;
    std::size_t n_qubits = 0;
};

/// Split, fit the encoder on train only, and encode every split.
inline SplitDataset prepare(const RawDataset &raw, std::uint64_t seed, std::size_t n_qubits,
                            std::optional<SplitSizes> sizes = std::nullopt) {
    DataSplits s = binarize_and_split(raw, seed, sizes);
    SplitDataset out;
    out.n_qubits = n_qubits;
    out.encoder = fit_encoder(s.train.features, n_qubits);
    for (auto [dst, src] : {std::pair{&out.train, &s.train}, {&out.valid, &s.valid}, {&out.test, &s.test}}) {
        dst->features = encode(out.encoder, src->features);
        dst->labels = src->labels;
        dst->source_rows = src->source_rows;
    }
    return out;
}

/// Circuit inputs for a split; qubits beyond the encoded dimension get angle 0.
inline std::vector<EncodedSample> to_samples(const Split &s, std::size_t n_qubits) {
    if (static_cast<std::size_t>(s.features.cols()) > n_qubits) {
        throw std::invalid_argument("encoded dimension exceeds the qubit count");
    }
    std::vector<EncodedSample> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i].angles.assign(n_qubits, 0.0);
        for (Eigen::Index j = 0; j < s.features.cols(); ++j) {
            out[i].angles[static_cast<std::size_t>(j)] = s.features(static_cast<Eigen::Index>(i), j);
        }
        out[i].label = s.labels[i];
    }
    return out;
}

/// All encoded training values, flattened (the input to fit_prior).
inline std::vector<double> flattened(const Split &s) {
    return std::vector<double>(s.features.data(), s.features.data() + s.features.size());
}

} // namespace vqclab
