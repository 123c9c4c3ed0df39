#pragma once

// Variance-based dimensionality reduction: PCA (centered), truncated SVD
// (uncentered) or the identity.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ich/core.hpp"

namespace ich {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMatrix> as_eigen(const FeatureMatrix& m) {
    return {m.values().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

/// A fitted linear projection.
///
/// For `DimredMethod::none` the model is the identity on `input_dims`
/// features; its component matrix is not materialized (k = input_dims).
struct ProjectionModel {
    DimredMethod method = DimredMethod::none;
    std::size_t input_dims = 0;
    std::optional<std::vector<double>> mean;  ///< present iff method == pca
    FeatureMatrix components;                 ///< k x input_dims, orthonormal rows
    std::vector<double> explained_variance;   ///< non-increasing, length k
    double total_variance = 0.0;              ///< sum of per-feature sample variances

    std::size_t k() const noexcept {
        return method == DimredMethod::none ? input_dims : components.rows();
    }

    /// Fraction of total variance captured by the retained components.
    double explained_ratio() const {
        if (total_variance <= 0.0) return 0.0;
        double s = 0.0;
        for (double v : explained_variance) s += v;
        return s / total_variance;
    }
};

namespace detail {

// Flip so the largest-magnitude entry (first one on ties) is positive.
inline void fix_sign(std::span<double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v[best] < 0)
        for (double& x : v) x = -x;
}

}  // namespace detail

/// Fits a projection with k = min(k_requested, n_samples, n_dims).
inline ProjectionModel fit_projection(const FeatureMatrix& data, DimredMethod method,
                                      std::size_t k_requested) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n == 0) throw DataError("cannot fit a projection on zero samples");
    if (k_requested == 0) throw ConfigError("requested component count must be positive");

    ProjectionModel model;
    model.method = method;
    model.input_dims = d;

    const auto x = as_eigen(data);
    Eigen::RowVectorXd mu = x.colwise().mean();
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    model.total_variance = n > 1 ? (x.rowwise() - mu).squaredNorm() / denom : 0.0;

    if (method == DimredMethod::none) {
        // Identity: each input dimension is one "component".
        Eigen::VectorXd var = n > 1 ? Eigen::VectorXd((x.rowwise() - mu).colwise().squaredNorm().transpose() / denom)
                                    : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        model.explained_variance.assign(var.data(), var.data() + var.size());
        std::sort(model.explained_variance.begin(), model.explained_variance.end(), std::greater<>());
        return model;
    }

    const std::size_t k = std::min({k_requested, n, d});
    Eigen::MatrixXd work;
    if (method == DimredMethod::pca) {
        work = x.rowwise() - mu;
        model.mean.emplace(mu.data(), mu.data() + mu.size());
    } else {
        work = x;
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(work, Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();

    model.components = FeatureMatrix(k, d);
    model.explained_variance.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto row = model.components.row(c);
        for (std::size_t j = 0; j < d; ++j) row[j] = v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
        detail::fix_sign(row);
        const double s = sigma(static_cast<Eigen::Index>(c));
        model.explained_variance[c] = n > 1 ? s * s / denom : 0.0;
    }
    return model;
}

/// Applies the model: (data - mean) * components^T.
inline FeatureMatrix project(const ProjectionModel& model, const FeatureMatrix& data) {
    if (data.cols() != model.input_dims)
        throw ConfigError("dimension mismatch: model expects " + std::to_string(model.input_dims) +
                          " features, data has " + std::to_string(data.cols()));
    if (model.method == DimredMethod::none) return data;

    const std::size_t k = model.components.rows();
    FeatureMatrix out(data.rows(), k);
    if (data.rows() == 0) return out;
    RowMatrix centered = as_eigen(data);
    if (model.mean) {
        Eigen::Map<const Eigen::RowVectorXd> mu(model.mean->data(), static_cast<Eigen::Index>(model.mean->size()));
        centered.rowwise() -= mu;
    }
    Eigen::Map<RowMatrix> dst(out.values().data(), static_cast<Eigen::Index>(out.rows()),
                              static_cast<Eigen::Index>(k));
    dst.noalias() = centered * as_eigen(model.components).transpose();
    return out;
}

}  // namespace ich
