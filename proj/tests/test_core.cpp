#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "support.hpp"

using namespace ich;
using testing_support::scratch_dir;

TEST(FeatureFile, SmallMatrixRoundTrip) {
    const LabeledDataset d(FeatureMatrix::from_rows({{1, 2, 3}, {4, 5, 6}}), {"a", "b"});
    const std::string bytes = encode_feature_file(d);
    const std::size_t header = 4 + 2 + 2 + 8 + 8 + (4 + 1) * 2;
    EXPECT_EQ(bytes.size(), header + 24);
    EXPECT_EQ(decode_feature_file(bytes), d);
}

TEST(FeatureFile, EmptyMatrix) {
    const LabeledDataset d(FeatureMatrix(0, 5), {});
    const auto back = decode_feature_file(encode_feature_file(d));
    EXPECT_EQ(back.size(), 0u);
    EXPECT_EQ(back.dims(), 5u);
    EXPECT_EQ(back, d);
}

TEST(FeatureFile, NonFiniteRejected) {
    FeatureMatrix m(2, 3);
    m(1, 2) = std::numeric_limits<double>::quiet_NaN();
    const LabeledDataset d(m, {"a", "b"});
    try {
        encode_feature_file(d);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "non-finite value at (1, 2)");
    }
}

TEST(FeatureFile, WrongMagic) {
    std::string bytes = encode_feature_file(LabeledDataset(FeatureMatrix::from_rows({{1.0}}), {"x"}));
    bytes[0] = 'X';
    EXPECT_THROW(
        {
            try {
                decode_feature_file(bytes);
            } catch (const DataError& e) {
                EXPECT_STREQ(e.what(), "unrecognized format");
                throw;
            }
        },
        DataError);
    EXPECT_THROW(decode_feature_file("IC"), DataError);
}

TEST(FeatureFile, TruncatedPayload) {
    const LabeledDataset three(FeatureMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}}), {"a", "b", "c"});
    std::string bytes = encode_feature_file(three);
    bytes.resize(bytes.size() - 8);  // payload for two rows only
    try {
        decode_feature_file(bytes);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
}

TEST(FeatureFile, TrailingBytesRejected) {
    std::string bytes = encode_feature_file(LabeledDataset(FeatureMatrix::from_rows({{1.0}}), {"x"}));
    bytes += "zz";
    EXPECT_THROW(decode_feature_file(bytes), DataError);
}

TEST(FeatureFile, RandomRoundTripProperty) {
    std::mt19937_64 g(7);
    std::uniform_int_distribution<int> dim(1, 9), rows(0, 12);
    std::uniform_real_distribution<float> val(-1e3f, 1e3f);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = rows(g), d = dim(g);
        std::vector<double> v(n * d);
        for (double& x : v) x = val(g);  // float-representable, so exact
        std::optional<std::vector<std::string>> labels;
        if (trial % 2) {
            labels.emplace();
            for (std::size_t i = 0; i < n; ++i) labels->push_back("L" + std::to_string(i % 3));
        }
        const auto ds = LabeledDataset::with_generated_ids(FeatureMatrix(n, d, v), labels);
        ASSERT_EQ(decode_feature_file(encode_feature_file(ds)), ds);
    }
}

TEST(FeatureFile, WriteReadOnDisk) {
    const auto dir = scratch_dir("core_io");
    const LabeledDataset d(FeatureMatrix::from_rows({{0.5, 1}, {0, 0.25}}), {"p", "q"},
                           std::vector<std::string>{"Ring", "Loc"});
    write_feature_file(d, dir / "f.ichf");
    EXPECT_EQ(read_feature_file(dir / "f.ichf"), d);
    EXPECT_EQ(load_features(dir / "f.ichf"), d);
}

TEST(FeatureFile, CsvImport) {
    const auto dir = scratch_dir("core_csv");
    {
        std::ofstream out(dir / "x.csv");
        out << "id,label,f0,f1\ns1,A,1.5,2\ns2,B,-3,4e-1\n";
    }
    const auto d = load_features(dir / "x.csv");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.dims(), 2u);
    EXPECT_EQ(d.sample_ids()[1], "s2");
    EXPECT_EQ((*d.labels())[0], "A");
    EXPECT_DOUBLE_EQ(d.features()(1, 1), 0.4);
    {
        std::ofstream out(dir / "bad.csv");
        out << "id,f0\ns1,abc\n";
    }
    EXPECT_THROW(load_features(dir / "bad.csv"), DataError);
}

TEST(Dataset, DuplicateIdsRejected) {
    EXPECT_THROW(LabeledDataset(FeatureMatrix::from_rows({{1}, {2}}), {"a", "a"}), DataError);
    EXPECT_THROW(LabeledDataset(FeatureMatrix::from_rows({{1}, {2}}), {"a"}), DataError);
    EXPECT_THROW(LabeledDataset(FeatureMatrix::from_rows({{1}, {2}}), {"a", "b"}, std::vector<std::string>{"x"}),
                 DataError);
}

TEST(Subset, IdentityEmptyAndSingle) {
    const auto d = LabeledDataset::with_generated_ids(FeatureMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}}),
                                                      std::vector<std::string>{"x", "y", "z"});
    EXPECT_EQ(subset_rows(d, IndexSubset::all(3)), d);
    const auto empty = subset_rows(d, IndexSubset());
    EXPECT_EQ(empty.size(), 0u);
    EXPECT_EQ(empty.dims(), 2u);
    const auto one = subset_rows(d, IndexSubset({1}));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.features(), FeatureMatrix::from_rows({{3, 4}}));
    EXPECT_EQ(one.sample_ids()[0], "sample_1");
    EXPECT_EQ((*one.labels())[0], "y");
    EXPECT_THROW(subset_rows(d, IndexSubset({5})), ConfigError);
}

TEST(Subset, CompositionMatchesDirectSelection) {
    FeatureMatrix m(10, 1);
    for (std::size_t i = 0; i < 10; ++i) m(i, 0) = static_cast<double>(i);
    const IndexSubset outer({1, 3, 4, 7, 9});
    const IndexSubset inner({0, 2, 4});
    const IndexSubset composed = outer.compose(inner);
    EXPECT_EQ(composed, IndexSubset({1, 4, 9}));
    EXPECT_EQ(subset_rows(subset_rows(m, outer), inner), subset_rows(m, composed));
    EXPECT_EQ(outer.minus(composed), IndexSubset({3, 7}));
    EXPECT_THROW(IndexSubset({2, 2}), ConfigError);
    EXPECT_THROW(IndexSubset::from_unsorted({3, 1, 3}), ConfigError);
}

TEST(Assignment, CanonicalOrdersByFirstMember) {
    const auto a = ClusterAssignment::canonical(IndexSubset::all(5), {7, 3, 7, 9, 3});
    EXPECT_EQ(a.k(), 3u);
    EXPECT_EQ(a.cluster_of(), (std::vector<std::size_t>{0, 1, 0, 2, 1}));
    EXPECT_EQ(a.cluster_sizes(), (std::vector<std::size_t>{2, 2, 1}));
    EXPECT_THROW(ClusterAssignment(IndexSubset::all(2), {0, 0}, 2), ConfigError);
}

TEST(Config, ValidationAndParsing) {
    HarvestConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n_c = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_EQ(parse_dimred_method("truncated-svd"), DimredMethod::truncated_svd);
    EXPECT_EQ(parse_cluster_method("ward"), ClusterMethod::ward);
    EXPECT_THROW(parse_silhouette_metric("manhattan"), ConfigError);
}

TEST(Random, StreamsAreReproducible) {
    Rng a(42, 3), b(42, 3), c(42, 4);
    for (int i = 0; i < 10; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        EXPECT_NE(x, c.next());
    }
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(r.below(7), 7u);
    }
}
