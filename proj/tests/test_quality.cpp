#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace ich;
using testing_support::from_rows;

namespace {

ClusterAssignment labels_to_assignment(const std::vector<std::size_t>& labels) {
    return ClusterAssignment::canonical(IndexSubset::all(labels.size()), labels);
}

std::vector<std::size_t> random_labels(std::size_t n, std::size_t k, std::mt19937_64& g) {
    std::vector<std::size_t> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = i < k ? i : g() % k;  // every cluster non-empty
    std::shuffle(l.begin(), l.end(), g);
    return l;
}

}  // namespace

TEST(Silhouette, HandComputedExample) {
    const auto x = FeatureMatrix::from_rows({{0.0}, {0.1}, {10.0}, {10.1}});
    const auto rep = silhouette(x, labels_to_assignment({0, 0, 1, 1}), SilhouetteMetric::euclidean);
    EXPECT_NEAR(rep.per_sample[0], oracle::kSilhouetteExample, 1e-9);
    EXPECT_NEAR(rep.per_sample[0], 0.990049751243781, 1e-9);
    // point 10.1: a = 0.1, b = (10.1 + 10.0) / 2 = 10.05
    EXPECT_NEAR(rep.per_sample[3], (10.05 - 0.1) / 10.05, 1e-9);
    // point 0.1: a = 0.1, b = (9.9 + 10.0) / 2 = 9.95
    EXPECT_NEAR(rep.per_sample[1], (9.95 - 0.1) / 9.95, 1e-9);
}

TEST(Silhouette, SingletonScoresZero) {
    const auto x = FeatureMatrix::from_rows({{0.0}, {0.2}, {5.0}});
    const auto rep = silhouette(x, labels_to_assignment({0, 0, 1}), SilhouetteMetric::euclidean);
    EXPECT_EQ(rep.per_sample[2], 0.0);
    EXPECT_EQ(rep.per_cluster[1], 0.0);
    EXPECT_EQ(rep.best_cluster, 0u);
}

TEST(Silhouette, IdenticalPointsScoreZero) {
    const auto x = FeatureMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
    for (auto metric : {SilhouetteMetric::euclidean, SilhouetteMetric::cosine}) {
        const auto rep = silhouette(x, labels_to_assignment({0, 1, 0, 1}), metric);
        for (double s : rep.per_sample) EXPECT_EQ(s, 0.0);
        EXPECT_EQ(rep.best_cluster, 0u);  // tie to the lowest id
    }
}

TEST(Silhouette, NeedsTwoClusters) {
    EXPECT_THROW(silhouette(FeatureMatrix::from_rows({{1}, {2}}), labels_to_assignment({0, 0}),
                            SilhouetteMetric::euclidean),
                 ConfigError);
}

TEST(Silhouette, ZeroVectorCosineConvention) {
    const auto x = FeatureMatrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {0, 2}});
    const auto rep = silhouette(x, labels_to_assignment({0, 0, 1, 1}), SilhouetteMetric::cosine);
    const auto expect = oracle::silhouette(testing_support::to_rows(x), {0, 0, 1, 1}, true);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(rep.per_sample[i], expect[i], 1e-12);
    EXPECT_EQ(cosine_distance(x.row(0), x.row(1), 0.0, 1.0), 1.0);
}

TEST(Silhouette, MatchesDirectEvaluationAndInvariances) {
    std::mt19937_64 g(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3 + g() % 14, d = 1 + g() % 4, k = 2 + g() % std::min<std::size_t>(n - 1, 4);
        const bool cosine = trial % 2 == 0;
        // In 1D every pair is parallel and cosine distances are pure rounding noise.
        const std::size_t dims = cosine && d == 1 ? 2 : d;
        const auto raw = oracle::random_matrix(n, dims, g());
        const auto labels = random_labels(n, k, g);
        const auto x = from_rows(raw);
        const auto a = ClusterAssignment(IndexSubset::all(n), labels, k);
        const auto metric = cosine ? SilhouetteMetric::cosine : SilhouetteMetric::euclidean;
        const auto rep = silhouette(x, a, metric);
        const auto expect = oracle::silhouette(raw, labels, cosine);
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_NEAR(rep.per_sample[i], expect[i], 1e-9);
            ASSERT_GE(rep.per_sample[i], -1.0);
            ASSERT_LE(rep.per_sample[i], 1.0);
        }
        // Positive scaling leaves both metrics unchanged; translation leaves Euclidean unchanged.
        FeatureMatrix scaled = x;
        for (double& v : scaled.values()) v *= 3.5;
        const auto rs = silhouette(scaled, a, metric);
        for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(rs.per_sample[i], rep.per_sample[i], 1e-9);
        if (!cosine) {
            FeatureMatrix shifted = x;
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < dims; ++c) shifted(r, c) += 7.0 * static_cast<double>(c + 1);
            const auto rt = silhouette(shifted, a, metric);
            for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(rt.per_sample[i], rep.per_sample[i], 1e-9);
        }
    }
}

TEST(Silhouette, SubsetMembersAddressParentRows) {
    const auto x = FeatureMatrix::from_rows({{100}, {0.0}, {-50}, {0.1}, {10.0}, {10.1}});
    const ClusterAssignment a(IndexSubset({1, 3, 4, 5}), {0, 0, 1, 1}, 2);
    EXPECT_NEAR(silhouette(x, a, SilhouetteMetric::euclidean).per_sample[0], oracle::kSilhouetteExample, 1e-9);
}

TEST(Homogeneity, PureAndUninformative) {
    EXPECT_DOUBLE_EQ(homogeneity(ContingencyTable::from_labels({"a", "a", "b", "b"}, {0, 0, 1, 1})), 1.0);
    EXPECT_DOUBLE_EQ(homogeneity(ContingencyTable::from_labels({"a", "a", "b", "b"}, {0, 0, 0, 0})), 0.0);
    EXPECT_DOUBLE_EQ(homogeneity(ContingencyTable::from_labels({"a", "a"}, {0, 1})), 1.0);
}

TEST(Homogeneity, FourSampleExample) {
    const auto t = ContingencyTable::from_labels({"c0", "c0", "c1", "c1"}, {0, 0, 0, 1});
    const double h = homogeneity(t);
    EXPECT_NEAR(h, oracle::kHomogeneityExample, 1e-12);
    EXPECT_NEAR(h, 0.31127, 1e-5);
    EXPECT_NEAR(oracle::homogeneity({"c0", "c0", "c1", "c1"}, {0, 0, 0, 1}), oracle::kHomogeneityExample, 1e-12);
    EXPECT_NEAR((1.0 - h) * std::log(2.0), oracle::kHomogeneityExampleHck, 1e-12);
}

TEST(Homogeneity, PermutationInvarianceAndOracle) {
    std::mt19937_64 g(99);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + g() % 40, nc = 1 + g() % 5, nk = 1 + g() % 6;
        std::vector<std::string> cls(n);
        std::vector<std::size_t> clu(n);
        for (std::size_t i = 0; i < n; ++i) {
            cls[i] = "c" + std::to_string(g() % nc);
            clu[i] = g() % nk;
        }
        const double h = homogeneity(ContingencyTable::from_labels(cls, clu));
        ASSERT_NEAR(h, oracle::homogeneity(cls, clu), 1e-12);
        ASSERT_GE(h, 0.0);
        ASSERT_LE(h, 1.0);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), g);
        std::vector<std::string> cls2;
        std::vector<std::size_t> clu2;
        for (std::size_t p : perm) {
            cls2.push_back(cls[p]);
            clu2.push_back((clu[p] * 7 + 3) % 11);  // injective relabel of cluster ids
        }
        ASSERT_NEAR(homogeneity(ContingencyTable::from_labels(cls2, clu2)), h, 1e-12);

        // Splitting every cluster by class is a refinement, so h cannot drop.
        std::vector<std::size_t> refined(n);
        for (std::size_t i = 0; i < n; ++i) refined[i] = clu[i] * 10 + static_cast<std::size_t>(cls[i][1] - '0');
        ASSERT_GE(homogeneity(ContingencyTable::from_labels(cls, refined)), h - 1e-12);
    }
}

TEST(Confusion, PerfectClustering) {
    const auto t = ContingencyTable::from_labels({"x", "y", "x", "z"}, {0, 1, 0, 2});
    const auto c = majority_confusion(t);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(c.matrix[i][j], i == j ? 1.0 : 0.0);
    EXPECT_EQ(c.clusters_per_class, (std::vector<std::size_t>{1, 1, 1}));
}

TEST(Confusion, SingleClusterTakesMajority) {
    const auto c = majority_confusion(ContingencyTable::from_labels({"b", "b", "b", "a"}, {0, 0, 0, 0}));
    EXPECT_EQ(c.classes, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(c.predicted_class[0], 1u);
    EXPECT_EQ(c.matrix[0], (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(c.matrix[1], (std::vector<double>{0.0, 1.0}));
}

TEST(Confusion, TiesGoToSmallestClass) {
    const auto c = majority_confusion(ContingencyTable::from_labels({"q", "p"}, {0, 0}));
    EXPECT_EQ(c.classes[c.predicted_class[0]], "p");
}

TEST(Confusion, MatchesReaggregationOracle) {
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t nc = 6, nk = 3 + g() % 8;
        std::vector<std::vector<long long>> counts(nc, std::vector<long long>(nk));
        std::vector<long long> flat;
        for (auto& row : counts)
            for (auto& v : row) v = static_cast<long long>(g() % 5);
        for (std::size_t k = 0; k < nk; ++k) counts[g() % nc][k] += 1;  // no empty clusters
        for (const auto& row : counts) flat.insert(flat.end(), row.begin(), row.end());
        const ContingencyTable t({"c0", "c1", "c2", "c3", "c4", "c5"}, nk, flat);
        const auto got = majority_confusion(t);
        const auto expect = oracle::confusion(counts);
        EXPECT_EQ(got.clusters_per_class, expect.clusters_per_class);
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = 0; j < nc; ++j) ASSERT_NEAR(got.matrix[i][j], expect.matrix[i][j], 1e-12);
    }
}

TEST(NearestNeighbor, EmptyAndTies) {
    const auto anchors = FeatureMatrix::from_rows({{0, 0}, {2, 0}});
    EXPECT_TRUE(nearest_neighbor_assign(anchors, {5, 3}, {0, 1}, FeatureMatrix(0, 2)).empty());
    // Equidistant orphan: anchor with sample index 3 (cluster 1) wins.
    EXPECT_EQ(nearest_neighbor_assign(anchors, {5, 3}, {0, 1}, FeatureMatrix::from_rows({{1, 0}})),
              (std::vector<std::size_t>{1}));
    EXPECT_EQ(nearest_neighbor_assign(anchors, {3, 5}, {0, 1}, FeatureMatrix::from_rows({{1, 0}})),
              (std::vector<std::size_t>{0}));
    EXPECT_THROW(nearest_neighbor_assign(FeatureMatrix(0, 2), {}, {}, FeatureMatrix::from_rows({{1, 0}})),
                 ConfigError);
}

TEST(NearestNeighbor, MatchesExhaustiveScan) {
    std::mt19937_64 g(17);
    for (int trial = 0; trial < 100; ++trial) {
        // Integer coordinates make exact ties common.
        oracle::Matrix anchors(50, std::vector<double>(3)), orphans(20, std::vector<double>(3));
        for (auto& r : anchors)
            for (double& v : r) v = static_cast<double>(g() % 5);
        for (auto& r : orphans)
            for (double& v : r) v = static_cast<double>(g() % 5);
        std::vector<std::size_t> ids(50), clusters(50);
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        std::shuffle(ids.begin(), ids.end(), g);
        for (auto& c : clusters) c = g() % 7;
        ASSERT_EQ(nearest_neighbor_assign(from_rows(anchors), ids, clusters, from_rows(orphans)),
                  oracle::nearest(anchors, ids, clusters, orphans));
    }
}
