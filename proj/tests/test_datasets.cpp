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

#include "vqclab/datasets.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <set>

#include "support/fixtures.hpp"

using namespace vqclab;
namespace fs = std::filesystem;

namespace {

const fs::path kData = VQCLAB_DATA_DIR;

const RawDataset &iris() {
    static const RawDataset d = load(DatasetName::Iris, kData / "iris.csv");
    return d;
}

const RawDataset &wine() {
    static const RawDataset d = load(DatasetName::Wine, kData / "wine.csv");
    return d;
}

const RawDataset &titanic() {
    static const RawDataset d =
        load(DatasetName::Titanic, testing_support::write_titanic(testing_support::scratch_dir("ds") / "train.csv"));
    return d;
}

const RawDataset &mnist() {
    static const RawDataset d =
        load(DatasetName::MNIST, testing_support::write_mnist(testing_support::scratch_dir("ds") / "mnist"));
    return d;
}

const RawDataset &by_name(DatasetName n) {
    switch (n) {
    case DatasetName::Iris: return iris();
    case DatasetName::Wine: return wine();
    case DatasetName::Titanic: return titanic();
    case DatasetName::MNIST: return mnist();
    }
    throw std::logic_error("unreachable");
}

fs::path write_text(const std::string &name, const std::string &body) {
    const auto p = testing_support::scratch_dir("ds_err") / name;
    std::ofstream(p) << body;
    return p;
}

template <class F> std::string error_of(F &&f) {
    try {
        f();
    } catch (const std::exception &e) {
        return e.what();
    }
    return "";
}

// Mean squared reconstruction error of centered rows projected onto `basis` columns.
double reconstruction_error(const Eigen::MatrixXd &centered, const Eigen::MatrixXd &basis) {
    const Eigen::MatrixXd q = basis.householderQr().householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
    const Eigen::MatrixXd r = centered - centered * q * q.transpose();
    return r.squaredNorm();
}

} // namespace

TEST(Datasets, IrisMatchesPublishedShape) {
    const auto &d = iris();
    EXPECT_EQ(d.instances(), 150u);
    EXPECT_EQ(d.original_features, 4u);
    EXPECT_EQ(d.features.cols(), 4);
    EXPECT_EQ(d.classes(), 3u);
    EXPECT_FLOAT_EQ(d.features(0, 0), 5.1f);
    EXPECT_FLOAT_EQ(d.features(0, 3), 0.2f);
    EXPECT_EQ(d.labels.front(), 0);
    EXPECT_EQ(d.labels.back(), 2);
    EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 1), 50);
}

TEST(Datasets, WineMatchesPublishedShape) {
    const auto &d = wine();
    EXPECT_EQ(d.instances(), 178u);
    EXPECT_EQ(d.original_features, 13u);
    EXPECT_EQ(d.classes(), 3u);
    EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 1), 59);
    EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 2), 71);
    EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 3), 48);
    EXPECT_FLOAT_EQ(d.features(0, 0), 14.23f);
    EXPECT_FLOAT_EQ(d.features(0, 12), 1065.0f);
}

TEST(Datasets, TitanicDropsIdentifiersAndKeepsMissingValues) {
    const auto &d = titanic();
    EXPECT_EQ(d.instances(), 891u);
    EXPECT_EQ(d.original_features, 11u);
    EXPECT_EQ(d.features.cols(), 7);
    EXPECT_EQ(d.classes(), 2u);
    EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 1), 342);
    const auto age = std::find(d.feature_names.begin(), d.feature_names.end(), "Age") - d.feature_names.begin();
    const auto port = std::find(d.feature_names.begin(), d.feature_names.end(), "Embarked") - d.feature_names.begin();
    ASSERT_LT(age, 7);
    ASSERT_LT(port, 7);
    EXPECT_EQ(d.features.col(age).array().isNaN().count(), 177);
    EXPECT_EQ(d.features.col(port).array().isNaN().count(), 2);
    const auto sex = std::find(d.feature_names.begin(), d.feature_names.end(), "Sex") - d.feature_names.begin();
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
        const float s = d.features(i, sex);
        EXPECT_TRUE(s == 0.0f || s == 1.0f);
    }
}

TEST(Datasets, MnistIdxLoads) {
    const auto &d = mnist();
    EXPECT_EQ(d.instances(), 60000u);
    EXPECT_EQ(d.original_features, 784u);
    EXPECT_EQ(d.classes(), 10u);
    EXPECT_GE(d.features.minCoeff(), 0.0f);
    EXPECT_LE(d.features.maxCoeff(), 255.0f);
}

TEST(Datasets, SplitSizesFollowTable) {
    for (const auto &info : kDatasets) {
        const auto s = binarize_and_split(by_name(info.name), 3);
        EXPECT_EQ(s.train.size(), info.splits.train) << info.id;
        EXPECT_EQ(s.valid.size(), info.splits.valid) << info.id;
        EXPECT_EQ(s.test.size(), info.splits.test) << info.id;
    }
}

TEST(Datasets, SplitsAreDisjointBinaryAndFromTheTwoSmallestClasses) {
    for (const auto &info : kDatasets) {
        const auto &raw = by_name(info.name);
        const std::set<int> classes(raw.labels.begin(), raw.labels.end());
        const int first = *classes.begin(), second = *std::next(classes.begin());
        const auto s = binarize_and_split(raw, 5);
        std::set<std::size_t> seen;
        for (const Split *part : {&s.train, &s.valid, &s.test}) {
            for (std::size_t i = 0; i < part->size(); ++i) {
                const std::size_t src = part->source_rows[i];
                EXPECT_TRUE(seen.insert(src).second) << info.id << " row " << src << " reused";
                const int orig = raw.labels[src];
                ASSERT_TRUE(orig == first || orig == second) << info.id;
                EXPECT_EQ(part->labels[i], orig == first ? 0 : 1);
                for (Eigen::Index j = 0; j < raw.features.cols(); ++j) {
                    const double a = part->features(static_cast<Eigen::Index>(i), j);
                    const float b = raw.features(static_cast<Eigen::Index>(src), j);
                    EXPECT_TRUE((std::isnan(a) && std::isnan(b)) || a == static_cast<double>(b));
                }
            }
        }
    }
}

TEST(Datasets, SplitIsSeedDeterministic) {
    const auto a = binarize_and_split(wine(), 17);
    const auto b = binarize_and_split(wine(), 17);
    const auto c = binarize_and_split(wine(), 18);
    EXPECT_EQ(a.train.source_rows, b.train.source_rows);
    EXPECT_EQ(a.test.source_rows, b.test.source_rows);
    EXPECT_NE(a.train.source_rows, c.train.source_rows);
}

TEST(Datasets, TrainAnglesSpanZeroToPi) {
    for (const auto &info : kDatasets) {
        const auto s = prepare(by_name(info.name), 9, 6);
        const Eigen::Index dims = static_cast<Eigen::Index>(std::min<std::size_t>(6, by_name(info.name).features.cols()));
        ASSERT_EQ(s.train.features.cols(), dims) << info.id;
        for (Eigen::Index j = 0; j < dims; ++j) {
            const auto col = s.train.features.col(j);
            if (s.encoder.hi(j) > s.encoder.lo(j)) {
                EXPECT_DOUBLE_EQ(col.minCoeff(), 0.0) << info.id;
                EXPECT_NEAR(col.maxCoeff(), std::numbers::pi, 1e-12) << info.id;
            }
        }
        for (const Split *part : {&s.train, &s.valid, &s.test}) {
            EXPECT_FALSE(part->features.array().isNaN().any()) << info.id;
            EXPECT_GE(part->features.minCoeff(), 0.0) << info.id;
            EXPECT_LE(part->features.maxCoeff(), std::numbers::pi) << info.id;
        }
    }
}

TEST(Datasets, EncoderFitsOnTrainOnly) {
    const auto raw = binarize_and_split(wine(), 21);
    const auto enc = fit_encoder(raw.train.features, 4);
    const auto full = prepare(wine(), 21, 4);
    EXPECT_TRUE(enc.medians.isApprox(full.encoder.medians));
    EXPECT_TRUE(enc.components.isApprox(full.encoder.components));
    EXPECT_TRUE(enc.lo.isApprox(full.encoder.lo));
    EXPECT_TRUE(enc.hi.isApprox(full.encoder.hi));
    // Perturbing test rows leaves the fitted state unchanged.
    auto other = raw;
    other.test.features.array() += 1000.0;
    EXPECT_TRUE(fit_encoder(other.train.features, 4).components.isApprox(enc.components));
}

TEST(Datasets, EncoderClipsOutOfRangeValues) {
    Eigen::MatrixXd train(3, 2);
    train << 0, 5, 1, 5, 2, 5;
    const auto enc = fit_encoder(train, 2);
    EXPECT_FALSE(enc.reduced);
    Eigen::MatrixXd x(3, 2);
    x << -4, 1, 1, 5, 9, 9;
    const auto z = encode(enc, x);
    EXPECT_DOUBLE_EQ(z(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(z(1, 0), std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(z(2, 0), std::numbers::pi);
    EXPECT_DOUBLE_EQ(z(0, 1), 0.0); // constant column
    EXPECT_DOUBLE_EQ(z(2, 1), 0.0);
}

TEST(Datasets, MissingValuesTakeTrainMedian) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd train(5, 1);
    train << 0, 10, nan, 4, 2;
    const auto enc = fit_encoder(train, 1);
    EXPECT_DOUBLE_EQ(enc.medians(0), 3.0); // median of {0, 2, 4, 10}
    Eigen::MatrixXd x(1, 1);
    x << nan;
    EXPECT_DOUBLE_EQ(encode(enc, x)(0, 0), 0.3 * std::numbers::pi);
}

TEST(Datasets, ReductionIsTheBestRankKLinearProjection) {
    const auto raw = binarize_and_split(wine(), 4);
    const Eigen::MatrixXd &x = raw.train.features;
    const auto enc = fit_encoder(x, 6);
    ASSERT_TRUE(enc.reduced);
    ASSERT_EQ(enc.components.cols(), 6);
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();

    // Oracle: the optimal rank-6 error is the sum of the trailing squared singular values.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto sv = svd.singularValues();
    double optimal = 0.0;
    for (Eigen::Index i = 6; i < sv.size(); ++i) {
        optimal += sv(i) * sv(i);
    }
    const double ours = reconstruction_error(centered, enc.components);
    EXPECT_NEAR(ours, optimal, 1e-8 * centered.squaredNorm());

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::MatrixXd basis(13, 6);
        for (Eigen::Index i = 0; i < basis.size(); ++i) {
            basis.data()[i] = g(rng);
        }
        EXPECT_LE(ours, reconstruction_error(centered, basis) * (1 + 1e-12));
    }
}

TEST(Datasets, LowDimensionalDataIsNotReduced) {
    const auto s = prepare(iris(), 2, 10);
    EXPECT_FALSE(s.encoder.reduced);
    EXPECT_EQ(s.train.features.cols(), 4);
    const auto samples = to_samples(s.train, 10);
    ASSERT_EQ(samples.size(), 60u);
    for (const auto &smp : samples) {
        ASSERT_EQ(smp.angles.size(), 10u);
        for (std::size_t q = 4; q < 10; ++q) {
            EXPECT_EQ(smp.angles[q], 0.0);
        }
    }
    EXPECT_THROW(to_samples(s.train, 3), std::invalid_argument);
}

TEST(Datasets, MnistReducesToQubitCount) {
    const auto s = prepare(mnist(), 1, 8);
    EXPECT_TRUE(s.encoder.reduced);
    EXPECT_EQ(s.test.features.cols(), 8);
    EXPECT_EQ(s.test.size(), 400u);
}

TEST(Datasets, FlattenedFeedsThePrior) {
    const auto s = prepare(iris(), 2, 4);
    const auto flat = flattened(s.train);
    EXPECT_EQ(flat.size(), 240u);
    EXPECT_DOUBLE_EQ(*std::min_element(flat.begin(), flat.end()), 0.0);
}

TEST(Datasets, NamesRoundTrip) {
    for (const auto &info : kDatasets) {
        EXPECT_EQ(parse_dataset_name(info.id), info.name);
    }
    EXPECT_EQ(parse_dataset_name("MNIST"), DatasetName::MNIST);
    EXPECT_THROW(parse_dataset_name("cifar"), std::invalid_argument);
}

TEST(DatasetErrors, MissingFile) {
    EXPECT_THROW(load(DatasetName::Iris, kData / "nope.csv"), DatasetError);
}

TEST(DatasetErrors, RaggedRowReportsLine) {
    const auto p = write_text("ragged.csv", "a,b,species\n1,2,x\n3,y\n");
    const auto msg = error_of([&] { load(DatasetName::Iris, p); });
    EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("expected 3 fields, got 2"), std::string::npos) << msg;
}

TEST(DatasetErrors, NonNumericFeature) {
    const auto p = write_text("text.csv", "a,b,species\n1,2,x\n3,abc,y\n");
    const auto msg = error_of([&] { load(DatasetName::Iris, p); });
    EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
}

TEST(DatasetErrors, WrongDimensions) {
    const auto p = write_text("short.csv", "a,b,c,d,species\n1,2,3,4,x\n1,2,3,4,y\n");
    const auto msg = error_of([&] { load(DatasetName::Iris, p); });
    EXPECT_NE(msg.find("expected 150x4"), std::string::npos) << msg;
}

TEST(DatasetErrors, BadIdxMagic) {
    const auto dir = testing_support::scratch_dir("ds_err") / "badidx";
    testing_support::write_mnist(dir, 5);
    {
        std::fstream f(dir / "train-images-idx3-ubyte", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(3);
        f.put(0x01);
    }
    const auto msg = error_of([&] { load(DatasetName::MNIST, dir); });
    EXPECT_NE(msg.find("bad IDX magic"), std::string::npos) << msg;
}

TEST(DatasetErrors, TruncatedIdx) {
    const auto dir = testing_support::scratch_dir("ds_err") / "shortidx";
    testing_support::write_mnist(dir, 5);
    fs::resize_file(dir / "train-images-idx3-ubyte", 16 + 784 * 2);
    EXPECT_THROW(load(DatasetName::MNIST, dir), DatasetError);
}

TEST(DatasetErrors, TooFewInstancesForSplit) {
    auto d = iris();
    EXPECT_THROW(binarize_and_split(d, 1, SplitSizes{90, 10, 10}), DatasetError);
    EXPECT_THROW(fit_encoder(Eigen::MatrixXd(0, 3), 2), DatasetError);
}
