#pragma once

// Cluster quality: silhouette scores, homogeneity, majority-label confusion
// matrices, and nearest-neighbor assignment of leftover samples.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ich/cluster.hpp"
#include "ich/core.hpp"
#include "ich/parallel.hpp"

namespace ich {

// ---------------------------------------------------------------------------
// Distances

/// Cosine distance 1 - u.v / (|u||v|). A zero vector is at distance 1 from
/// everything.
inline double cosine_distance(std::span<const double> u, std::span<const double> v, double norm_u,
                              double norm_v) noexcept {
    if (norm_u == 0.0 || norm_v == 0.0) return 1.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    const double d = 1.0 - dot / (norm_u * norm_v);
    return std::clamp(d, 0.0, 2.0);
}

inline double euclidean_distance(std::span<const double> u, std::span<const double> v) noexcept {
    return std::sqrt(squared_distance(u, v));
}

// ---------------------------------------------------------------------------
// Silhouette

struct SilhouetteReport {
    std::vector<double> per_sample;   ///< aligned with assignment.members()
    std::vector<double> per_cluster;  ///< mean per_sample over each cluster
    std::size_t best_cluster = 0;     ///< argmax per_cluster, lowest id on ties

    double best_score() const { return per_cluster.at(best_cluster); }
};

/// Silhouette s = (b - a) / max(a, b) of every member of `assignment`,
/// where rows of `data` are addressed by the member indices.
///
/// a is the mean distance to the other members of the own cluster, b the
/// smallest mean distance to the members of another cluster. Members of a
/// singleton cluster score 0, as does any sample with max(a, b) = 0.
inline SilhouetteReport silhouette(const FeatureMatrix& data, const ClusterAssignment& assignment,
                                   SilhouetteMetric metric) {
    const std::size_t k = assignment.k();
    if (k < 2) throw ConfigError("silhouette needs at least 2 clusters");
    const std::size_t m = assignment.size();
    const auto& members = assignment.members();
    const auto& cl = assignment.cluster_of();
    for (std::size_t idx : members)
        if (idx >= data.rows()) throw ConfigError("assignment refers to a row outside the data");

    std::vector<double> norms;
    if (metric == SilhouetteMetric::cosine) {
        norms.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (double x : data.row(members[i])) s += x * x;
            norms[i] = std::sqrt(s);
        }
    }
    const auto sizes = assignment.cluster_sizes();

    SilhouetteReport rep;
    rep.per_sample.assign(m, 0.0);
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        std::vector<double> sums(k);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t own = cl[i];
            if (sizes[own] <= 1) continue;
            std::fill(sums.begin(), sums.end(), 0.0);
            const auto ri = data.row(members[i]);
            for (std::size_t j = 0; j < m; ++j) {
                if (j == i) continue;
                const auto rj = data.row(members[j]);
                sums[cl[j]] += metric == SilhouetteMetric::cosine ? cosine_distance(ri, rj, norms[i], norms[j])
                                                                  : euclidean_distance(ri, rj);
            }
            const double a = sums[own] / static_cast<double>(sizes[own] - 1);
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c)
                if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
            const double denom = std::max(a, b);
            rep.per_sample[i] = denom > 0.0 ? (b - a) / denom : 0.0;
        }
    });

    rep.per_cluster.assign(k, 0.0);
    for (std::size_t i = 0; i < m; ++i) rep.per_cluster[cl[i]] += rep.per_sample[i];
    for (std::size_t c = 0; c < k; ++c) rep.per_cluster[c] /= static_cast<double>(sizes[c]);
    rep.best_cluster = static_cast<std::size_t>(
        std::max_element(rep.per_cluster.begin(), rep.per_cluster.end()) - rep.per_cluster.begin());
    return rep;
}

// ---------------------------------------------------------------------------
// Contingency tables and homogeneity

/// Class x cluster count matrix. Classes are kept in lexicographic order.
class ContingencyTable {
public:
    ContingencyTable(std::vector<std::string> classes, std::size_t n_clusters,
                     std::vector<long long> counts)
        : classes_(std::move(classes)), n_clusters_(n_clusters), counts_(std::move(counts)) {
        if (counts_.size() != classes_.size() * n_clusters_)
            throw ConfigError("contingency table shape mismatch");
        for (long long c : counts_)
            if (c < 0) throw ConfigError("contingency table has negative counts");
    }

    /// Builds a table from parallel label / cluster-id sequences.
    static ContingencyTable from_labels(const std::vector<std::string>& labels,
                                        const std::vector<std::size_t>& clusters) {
        if (labels.size() != clusters.size()) throw ConfigError("labels and clusters differ in length");
        std::map<std::string, std::size_t> class_index;
        for (const auto& l : labels) class_index.emplace(l, 0);
        std::vector<std::string> classes;
        for (auto& [name, idx] : class_index) {
            idx = classes.size();
            classes.push_back(name);
        }
        std::size_t k = 0;
        for (std::size_t c : clusters) k = std::max(k, c + 1);
        std::vector<long long> counts(classes.size() * k, 0);
        for (std::size_t i = 0; i < labels.size(); ++i) ++counts[class_index[labels[i]] * k + clusters[i]];
        return ContingencyTable(std::move(classes), k, std::move(counts));
    }

    const std::vector<std::string>& classes() const noexcept { return classes_; }
    std::size_t n_classes() const noexcept { return classes_.size(); }
    std::size_t n_clusters() const noexcept { return n_clusters_; }
    long long count(std::size_t cls, std::size_t cluster) const { return counts_[cls * n_clusters_ + cluster]; }

    long long total() const {
        long long t = 0;
        for (long long c : counts_) t += c;
        return t;
    }
    std::vector<long long> class_totals() const {
        std::vector<long long> t(classes_.size(), 0);
        for (std::size_t c = 0; c < classes_.size(); ++c)
            for (std::size_t k = 0; k < n_clusters_; ++k) t[c] += count(c, k);
        return t;
    }
    std::vector<long long> cluster_totals() const {
        std::vector<long long> t(n_clusters_, 0);
        for (std::size_t c = 0; c < classes_.size(); ++c)
            for (std::size_t k = 0; k < n_clusters_; ++k) t[k] += count(c, k);
        return t;
    }

private:
    std::vector<std::string> classes_;
    std::size_t n_clusters_;
    std::vector<long long> counts_;
};

/// h = 1 - H(C|K) / H(C), natural log. A single-class table scores 1.
inline double homogeneity(const ContingencyTable& table) {
    const long long n_ll = table.total();
    if (n_ll < 1) throw ConfigError("homogeneity needs at least one sample");
    const double n = static_cast<double>(n_ll);
    const auto nc = table.class_totals();
    const auto nk = table.cluster_totals();

    double h_c = 0.0;
    for (long long c : nc)
        if (c > 0) h_c -= (static_cast<double>(c) / n) * std::log(static_cast<double>(c) / n);
    if (h_c <= 0.0) return 1.0;

    double h_ck = 0.0;
    for (std::size_t c = 0; c < table.n_classes(); ++c)
        for (std::size_t k = 0; k < table.n_clusters(); ++k) {
            const long long v = table.count(c, k);
            if (v > 0)
                h_ck -= (static_cast<double>(v) / n) *
                        std::log(static_cast<double>(v) / static_cast<double>(nk[k]));
        }
    return std::clamp(1.0 - h_ck / h_c, 0.0, 1.0);
}

/// Majority-label confusion: rows are true classes, columns predicted
/// classes, normalized by true-class totals.
struct MajorityConfusion {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> matrix;
    std::vector<std::size_t> clusters_per_class;
    std::vector<std::size_t> predicted_class;  ///< per cluster
};

inline MajorityConfusion majority_confusion(const ContingencyTable& table) {
    const std::size_t nc = table.n_classes();
    const std::size_t nk = table.n_clusters();
    MajorityConfusion out;
    out.classes = table.classes();
    out.matrix.assign(nc, std::vector<double>(nc, 0.0));
    out.clusters_per_class.assign(nc, 0);
    out.predicted_class.assign(nk, 0);

    const auto totals = table.cluster_totals();
    for (std::size_t k = 0; k < nk; ++k) {
        if (totals[k] == 0) throw ConfigError("cluster " + std::to_string(k) + " is empty");
        std::size_t best = 0;
        for (std::size_t c = 1; c < nc; ++c)
            if (table.count(c, k) > table.count(best, k)) best = c;
        out.predicted_class[k] = best;
        ++out.clusters_per_class[best];
    }
    const auto class_totals = table.class_totals();
    for (std::size_t c = 0; c < nc; ++c) {
        if (class_totals[c] == 0) continue;
        for (std::size_t k = 0; k < nk; ++k)
            out.matrix[c][out.predicted_class[k]] += static_cast<double>(table.count(c, k));
        for (double& v : out.matrix[c]) v /= static_cast<double>(class_totals[c]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nearest-neighbor assignment

/// Cluster id of each orphan's nearest anchor (Euclidean). `anchor_ids` are
/// the anchors' sample indices, used only for tie-breaks (lowest wins).
inline std::vector<std::size_t> nearest_neighbor_assign(const FeatureMatrix& anchors,
                                                        const std::vector<std::size_t>& anchor_ids,
                                                        const std::vector<std::size_t>& anchor_clusters,
                                                        const FeatureMatrix& orphans) {
    if (anchors.rows() == 0) throw ConfigError("nearest-neighbor assignment needs at least one anchor");
    if (anchor_ids.size() != anchors.rows() || anchor_clusters.size() != anchors.rows())
        throw ConfigError("anchor metadata does not match anchor rows");
    if (orphans.rows() > 0 && orphans.cols() != anchors.cols())
        throw ConfigError("dimension mismatch between anchors and orphans");

    std::vector<std::size_t> out(orphans.rows());
    parallel_for(orphans.rows(), [&](std::size_t b, std::size_t e) {
        for (std::size_t o = b; o < e; ++o) {
            std::size_t best = 0;
            double best_d = squared_distance(orphans.row(o), anchors.row(0));
            for (std::size_t a = 1; a < anchors.rows(); ++a) {
                const double d = squared_distance(orphans.row(o), anchors.row(a));
                if (d < best_d || (d == best_d && anchor_ids[a] < anchor_ids[best])) {
                    best_d = d;
                    best = a;
                }
            }
            out[o] = anchor_clusters[best];
        }
    }, 4);
    return out;
}

}  // namespace ich
