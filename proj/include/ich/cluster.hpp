#pragma once

// Per-iteration clustering: Ward agglomerative clustering and k-means.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "ich/core.hpp"
#include "ich/parallel.hpp"
#include "ich/random.hpp"

namespace ich {

/// One merge of the Ward dendrogram. Node ids follow the usual convention:
/// leaves are 0..n-1 and the merge at step s creates node n+s.
struct MergeStep {
    std::size_t left_cluster = 0;
    std::size_t right_cluster = 0;
    double merge_cost = 0.0;  ///< increase of the within-cluster sum of squares
    std::size_t new_node = 0;
    std::size_t new_size = 0;
};

/// Squared Euclidean distance.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

namespace detail {

// Full symmetric matrix of squared Euclidean distances.
inline std::vector<double> pairwise_squared(const FeatureMatrix& data) {
    const std::size_t n = data.rows();
    std::vector<double> dist(n * n, 0.0);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) dist[i * n + j] = squared_distance(data.row(i), data.row(j));
    });
    return dist;
}

struct WardRun {
    std::vector<MergeStep> merges;
    std::vector<std::size_t> representative_of;  // per sample, after the requested merges
};

// Runs `n_merges` Ward merges. Active clusters are identified by their
// smallest member index; the pair ordering for tie-breaks uses these ids.
//
// Lance-Williams on D = 2 * (ward increase), seeded with squared distances:
//   D(i+j, m) = ((ni+nm) D(i,m) + (nj+nm) D(j,m) - nm D(i,j)) / (ni+nj+nm)
inline WardRun ward_merges(const FeatureMatrix& data, std::size_t n_merges) {
    const std::size_t n = data.rows();
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t none = static_cast<std::size_t>(-1);

    std::vector<double> dist = pairwise_squared(data);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> node(n);  // dendrogram node id of each active cluster
    std::iota(node.begin(), node.end(), std::size_t{0});
    std::vector<char> active(n, 1);
    std::vector<std::size_t> nn(n, none);
    std::vector<double> nn_cost(n, inf);

    // nn[i] is the nearest active j != i, ties to the smallest j.
    auto refresh = [&](std::size_t i) {
        nn[i] = none;
        nn_cost[i] = inf;
        const double* row = &dist[i * n];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            if (row[j] < nn_cost[i]) {
                nn_cost[i] = row[j];
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    WardRun run;
    run.merges.reserve(n_merges);
    for (std::size_t step = 0; step < n_merges; ++step) {
        // Global minimum; ties resolved by the lexicographically smallest pair.
        std::size_t a = none, b = none;
        double best = inf;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] || nn[i] == none) continue;
            const std::size_t lo = std::min(i, nn[i]);
            const std::size_t hi = std::max(i, nn[i]);
            if (nn_cost[i] < best || (nn_cost[i] == best && (lo < a || (lo == a && hi < b)))) {
                best = nn_cost[i];
                a = lo;
                b = hi;
            }
        }

        const double na = static_cast<double>(size[a]);
        const double nb = static_cast<double>(size[b]);
        const double dab = dist[a * n + b];
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == a || m == b) continue;
            const double nm = static_cast<double>(size[m]);
            const double updated =
                ((na + nm) * dist[a * n + m] + (nb + nm) * dist[b * n + m] - nm * dab) / (na + nb + nm);
            dist[a * n + m] = updated;
            dist[m * n + a] = updated;
        }
        active[b] = 0;
        size[a] += size[b];

        MergeStep ms;
        ms.left_cluster = std::min(node[a], node[b]);
        ms.right_cluster = std::max(node[a], node[b]);
        ms.merge_cost = dab / 2.0;
        ms.new_node = n + step;
        ms.new_size = size[a];
        run.merges.push_back(ms);
        node[a] = n + step;

        // Repair nearest-neighbor entries affected by the merge.
        refresh(a);
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == a) continue;
            if (nn[m] == a || nn[m] == b) {
                refresh(m);
            } else {
                const double c = dist[m * n + a];
                if (c < nn_cost[m] || (c == nn_cost[m] && a < nn[m])) {
                    nn_cost[m] = c;
                    nn[m] = a;
                }
            }
        }

        // Union bookkeeping for the final cut: b's members now belong to a.
        if (run.representative_of.empty()) {
            run.representative_of.resize(n);
            std::iota(run.representative_of.begin(), run.representative_of.end(), std::size_t{0});
        }
        for (auto& r : run.representative_of)
            if (r == b) r = a;
    }
    if (run.representative_of.empty()) {
        run.representative_of.resize(n);
        std::iota(run.representative_of.begin(), run.representative_of.end(), std::size_t{0});
    }
    return run;
}

}  // namespace detail

/// Ward-linkage agglomerative clustering cut at k clusters. Cluster ids are
/// numbered in order of each cluster's smallest member index.
inline ClusterAssignment ward_cluster(const FeatureMatrix& data, std::size_t k) {
    const std::size_t n = data.rows();
    if (n == 0) throw DataError("cannot cluster zero samples");
    if (k < 1 || k > n)
        throw ConfigError("cluster count " + std::to_string(k) + " out of range [1, " + std::to_string(n) + "]");
    auto run = detail::ward_merges(data, n - k);
    return ClusterAssignment::canonical(IndexSubset::all(n), run.representative_of);
}

/// Complete Ward dendrogram (n-1 merges).
inline std::vector<MergeStep> ward_dendrogram(const FeatureMatrix& data) {
    if (data.rows() == 0) throw DataError("cannot cluster zero samples");
    return detail::ward_merges(data, data.rows() - 1).merges;
}

/// Within-cluster sum of squared distances to the cluster means.
inline double within_cluster_ss(const FeatureMatrix& data, const ClusterAssignment& a) {
    const std::size_t d = data.cols();
    std::vector<double> sums(a.k() * d, 0.0);
    const auto sizes = a.cluster_sizes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto r = data.row(a.members()[i]);
        for (std::size_t j = 0; j < d; ++j) sums[a.cluster_of()[i] * d + j] += r[j];
    }
    for (std::size_t c = 0; c < a.k(); ++c)
        for (std::size_t j = 0; j < d; ++j) sums[c * d + j] /= static_cast<double>(sizes[c]);
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        total += squared_distance(data.row(a.members()[i]),
                                  std::span<const double>(&sums[a.cluster_of()[i] * d], d));
    return total;
}

/// Lloyd's k-means from k-means++ seeding. Stops when assignments are stable
/// or after `max_iterations`. Clusters that end up empty (possible with
/// duplicate points) are dropped, so the result may have fewer than k.
inline ClusterAssignment kmeans_cluster(const FeatureMatrix& data, std::size_t k, std::uint64_t seed,
                                        std::size_t max_iterations = 300) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n == 0) throw DataError("cannot cluster zero samples");
    if (k < 1 || k > n)
        throw ConfigError("cluster count " + std::to_string(k) + " out of range [1, " + std::to_string(n) + "]");

    Rng rng(seed);
    std::vector<double> centers(k * d);
    auto center = [&](std::size_t c) { return std::span<double>(&centers[c * d], d); };

    // k-means++ seeding.
    std::vector<double> closest(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.below(n);
    std::copy(data.row(first).begin(), data.row(first).end(), center(0).begin());
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            closest[i] = std::min(closest[i], squared_distance(data.row(i), center(c - 1)));
            total += closest[i];
        }
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += closest[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        std::copy(data.row(pick).begin(), data.row(pick).end(), center(c).begin());
    }

    std::vector<std::size_t> label(n, 0);
    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = squared_distance(data.row(i), center(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double dc = squared_distance(data.row(i), center(c));
                if (dc < best_d) {
                    best_d = dc;
                    best = c;
                }
            }
            if (iter == 0 || best != label[i]) changed = true;
            label[i] = best;
        }
        if (!changed) break;
        std::fill(counts.begin(), counts.end(), 0);
        std::vector<double> sums(k * d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[label[i]];
            auto r = data.row(i);
            for (std::size_t j = 0; j < d; ++j) sums[label[i] * d + j] += r[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // keep the old center
            for (std::size_t j = 0; j < d; ++j) centers[c * d + j] = sums[c * d + j] / static_cast<double>(counts[c]);
        }
    }
    return ClusterAssignment::canonical(IndexSubset::all(n), label);
}

}  // namespace ich
