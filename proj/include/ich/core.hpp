#pragma once

// Domain types shared by every ich module: feature matrices, labeled
// datasets, index subsets and cluster assignments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace ich {

/// Raised for bad input data (unreadable files, invariant violations in data).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid parameters (cluster counts out of range, bad config).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of feature vectors, one sample per row.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
        if (cols_ == 0) throw ConfigError("feature matrix needs at least one dimension");
    }

    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (cols_ == 0) throw ConfigError("feature matrix needs at least one dimension");
        if (values_.size() != rows_ * cols_)
            throw ConfigError("feature matrix payload does not match its shape");
    }

    static FeatureMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        if (rows.size() == 0) throw ConfigError("from_rows needs at least one row");
        const std::size_t cols = rows.begin()->size();
        std::vector<double> values;
        values.reserve(rows.size() * cols);
        for (const auto& r : rows) {
            if (r.size() != cols) throw ConfigError("ragged rows");
            values.insert(values.end(), r.begin(), r.end());
        }
        return FeatureMatrix(rows.size(), cols, std::move(values));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {values_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    /// Position of the first NaN/Inf entry, if any.
    std::optional<std::pair<std::size_t, std::size_t>> find_non_finite() const {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i])) return std::pair{i / cols_, i % cols_};
        return std::nullopt;
    }

    void require_finite() const {
        if (auto bad = find_non_finite())
            throw DataError("non-finite value at (" + std::to_string(bad->first) + ", " +
                            std::to_string(bad->second) + ")");
    }

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 1;
    std::vector<double> values_;
};

/// Ordered set of row indices into a parent dataset (strictly increasing).
class IndexSubset {
public:
    IndexSubset() = default;

    explicit IndexSubset(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
        for (std::size_t i = 1; i < indices_.size(); ++i)
            if (indices_[i] <= indices_[i - 1])
                throw ConfigError("index subset must be strictly increasing");
    }

    static IndexSubset all(std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return IndexSubset(std::move(idx));
    }

    /// Builds a subset from an arbitrary list; sorts and rejects duplicates.
    static IndexSubset from_unsorted(std::vector<std::size_t> indices) {
        std::sort(indices.begin(), indices.end());
        return IndexSubset(std::move(indices));
    }

    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    std::size_t operator[](std::size_t i) const noexcept { return indices_[i]; }
    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

    bool contains(std::size_t idx) const {
        return std::binary_search(indices_.begin(), indices_.end(), idx);
    }

    /// Maps local positions (into this subset) back to parent indices.
    IndexSubset compose(const IndexSubset& local) const {
        std::vector<std::size_t> out;
        out.reserve(local.size());
        for (std::size_t i : local) {
            if (i >= indices_.size()) throw ConfigError("composed index out of range");
            out.push_back(indices_[i]);
        }
        return IndexSubset(std::move(out));
    }

    /// Elements of this subset not in `other`.
    IndexSubset minus(const IndexSubset& other) const {
        std::vector<std::size_t> out;
        out.reserve(indices_.size());
        std::set_difference(indices_.begin(), indices_.end(), other.begin(), other.end(),
                            std::back_inserter(out));
        return IndexSubset(std::move(out));
    }

    friend bool operator==(const IndexSubset&, const IndexSubset&) = default;

private:
    std::vector<std::size_t> indices_;
};

/// Features plus mandatory sample ids and optional string labels.
class LabeledDataset {
public:
    LabeledDataset() = default;

    LabeledDataset(FeatureMatrix features, std::vector<std::string> sample_ids,
                   std::optional<std::vector<std::string>> labels = std::nullopt)
        : features_(std::move(features)), ids_(std::move(sample_ids)), labels_(std::move(labels)) {
        if (ids_.size() != features_.rows())
            throw DataError("sample id count does not match number of rows");
        if (labels_ && labels_->size() != features_.rows())
            throw DataError("label count does not match number of rows");
        std::unordered_set<std::string> seen;
        seen.reserve(ids_.size());
        for (const auto& id : ids_)
            if (!seen.insert(id).second) throw DataError("duplicate sample id '" + id + "'");
    }

    /// Generates ids "sample_{i}" for datasets ingested without them.
    static LabeledDataset with_generated_ids(FeatureMatrix features,
                                             std::optional<std::vector<std::string>> labels = std::nullopt) {
        std::vector<std::string> ids(features.rows());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "sample_" + std::to_string(i);
        return LabeledDataset(std::move(features), std::move(ids), std::move(labels));
    }

    const FeatureMatrix& features() const noexcept { return features_; }
    const std::vector<std::string>& sample_ids() const noexcept { return ids_; }
    const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }
    bool has_labels() const noexcept { return labels_.has_value(); }
    std::size_t size() const noexcept { return features_.rows(); }
    std::size_t dims() const noexcept { return features_.cols(); }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    FeatureMatrix features_;
    std::vector<std::string> ids_;
    std::optional<std::vector<std::string>> labels_;
};

/// Rows of `m` selected by `subset`, in index order.
inline FeatureMatrix subset_rows(const FeatureMatrix& m, const IndexSubset& subset) {
    std::vector<double> values;
    values.reserve(subset.size() * m.cols());
    for (std::size_t idx : subset) {
        if (idx >= m.rows())
            throw ConfigError("subset index " + std::to_string(idx) + " out of range");
        auto r = m.row(idx);
        values.insert(values.end(), r.begin(), r.end());
    }
    return FeatureMatrix(subset.size(), m.cols(), std::move(values));
}

inline LabeledDataset subset_rows(const LabeledDataset& d, const IndexSubset& subset) {
    FeatureMatrix features = subset_rows(d.features(), subset);
    std::vector<std::string> ids;
    ids.reserve(subset.size());
    for (std::size_t idx : subset) ids.push_back(d.sample_ids()[idx]);
    std::optional<std::vector<std::string>> labels;
    if (d.labels()) {
        labels.emplace();
        labels->reserve(subset.size());
        for (std::size_t idx : subset) labels->push_back((*d.labels())[idx]);
    }
    return LabeledDataset(std::move(features), std::move(ids), std::move(labels));
}

/// Partition of a set of samples into k non-empty clusters.
///
/// `cluster_of()[i]` is the cluster of `members()[i]`.
class ClusterAssignment {
public:
    ClusterAssignment() = default;

    ClusterAssignment(IndexSubset members, std::vector<std::size_t> cluster_of, std::size_t k)
        : members_(std::move(members)), cluster_of_(std::move(cluster_of)), k_(k) {
        if (cluster_of_.size() != members_.size())
            throw ConfigError("cluster assignment size mismatch");
        std::vector<std::size_t> counts(k_, 0);
        for (std::size_t c : cluster_of_) {
            if (c >= k_) throw ConfigError("cluster id out of range");
            ++counts[c];
        }
        for (std::size_t c = 0; c < k_; ++c)
            if (counts[c] == 0) throw ConfigError("cluster " + std::to_string(c) + " is empty");
    }

    /// Relabels raw cluster labels so ids run 0..k-1 in order of each
    /// cluster's first member; raw labels that never occur are dropped.
    static ClusterAssignment canonical(IndexSubset members, const std::vector<std::size_t>& raw) {
        std::vector<std::size_t> relabel;
        std::vector<std::size_t> out(raw.size());
        std::size_t max_raw = 0;
        for (std::size_t r : raw) max_raw = std::max(max_raw, r);
        const std::size_t none = static_cast<std::size_t>(-1);
        relabel.assign(raw.empty() ? 0 : max_raw + 1, none);
        std::size_t next = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (relabel[raw[i]] == none) relabel[raw[i]] = next++;
            out[i] = relabel[raw[i]];
        }
        return ClusterAssignment(std::move(members), std::move(out), next);
    }

    const IndexSubset& members() const noexcept { return members_; }
    const std::vector<std::size_t>& cluster_of() const noexcept { return cluster_of_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return members_.size(); }

    /// Local positions (into members()) of the samples in cluster `c`.
    IndexSubset local_members_of(std::size_t c) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < cluster_of_.size(); ++i)
            if (cluster_of_[i] == c) out.push_back(i);
        return IndexSubset(std::move(out));
    }

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(k_, 0);
        for (std::size_t c : cluster_of_) ++sizes[c];
        return sizes;
    }

    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;

private:
    IndexSubset members_;
    std::vector<std::size_t> cluster_of_;
    std::size_t k_ = 0;
};

enum class SilhouetteMetric { cosine, euclidean };
enum class DimredMethod { pca, truncated_svd, none };
enum class ClusterMethod { ward, kmeans };

inline std::string to_string(SilhouetteMetric m) {
    return m == SilhouetteMetric::cosine ? "cosine" : "euclidean";
}
inline std::string to_string(DimredMethod m) {
    switch (m) {
        case DimredMethod::pca: return "pca";
        case DimredMethod::truncated_svd: return "svd";
        case DimredMethod::none: return "none";
    }
    return "?";
}
inline std::string to_string(ClusterMethod m) { return m == ClusterMethod::ward ? "ward" : "kmeans"; }

inline SilhouetteMetric parse_silhouette_metric(const std::string& s) {
    if (s == "cosine") return SilhouetteMetric::cosine;
    if (s == "euclidean") return SilhouetteMetric::euclidean;
    throw ConfigError("unknown silhouette metric '" + s + "'");
}
inline DimredMethod parse_dimred_method(const std::string& s) {
    if (s == "pca") return DimredMethod::pca;
    if (s == "svd" || s == "truncated-svd") return DimredMethod::truncated_svd;
    if (s == "none") return DimredMethod::none;
    throw ConfigError("unknown dimensionality reduction '" + s + "'");
}
inline ClusterMethod parse_cluster_method(const std::string& s) {
    if (s == "ward" || s == "ward-ac") return ClusterMethod::ward;
    if (s == "kmeans") return ClusterMethod::kmeans;
    throw ConfigError("unknown clustering method '" + s + "'");
}

/// Hyperparameters of one harvesting (or one-time clustering) run.
struct HarvestConfig {
    std::size_t n_pca = 20;
    std::size_t n_c = 15;
    std::size_t n_min = 5;
    SilhouetteMetric silhouette_metric = SilhouetteMetric::cosine;
    DimredMethod dimred_method = DimredMethod::pca;
    ClusterMethod cluster_method = ClusterMethod::ward;
    std::uint64_t seed = 0;
    bool full_assign = false;
    bool trace = false;

    void validate() const {
        if (n_pca < 1) throw ConfigError("n_pca must be at least 1");
        if (n_c < 2) throw ConfigError("n_c must be at least 2");
        if (n_min < 1) throw ConfigError("n_min must be at least 1");
    }
};

}  // namespace ich
