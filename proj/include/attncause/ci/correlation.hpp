#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attncause/error.hpp"

namespace attncause {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Attention weights over L tokens. Rows are softmax distributions unless
/// `synthetic_factor` is set, which marks a covariance factor standing in for
/// attention (no sign or row-sum constraint).
template <typename Scalar = double>
struct AttentionMatrix {
    DenseMatrix<Scalar> values;
    bool synthetic_factor = false;

    [[nodiscard]] Eigen::Index tokens() const { return values.rows(); }
};

template <typename Scalar = double>
struct CorrelationMatrix {
    DenseMatrix<Scalar> values;
    std::int64_t effective_sample_size = 0;

    [[nodiscard]] Eigen::Index dim() const { return values.rows(); }
};

using Attention = AttentionMatrix<double>;
using Correlation = CorrelationMatrix<double>;

inline constexpr double kRowSumTolerance = 1e-6;
/// Sample size assumed for synthetic covariance factors, which are exact
/// population quantities rather than estimates.
inline constexpr std::int64_t kPopulationSampleSize = 1'000'000'000;

/// Throws FormatError unless the matrix is square and, for softmax
/// attention, non-negative with unit row sums.
template <typename Scalar>
void validate(const AttentionMatrix<Scalar>& a) {
    const auto& v = a.values;
    if (v.rows() != v.cols() || v.rows() == 0) {
        throw FormatError("attention matrix must be square and non-empty, got " + std::to_string(v.rows()) +
                          "x" + std::to_string(v.cols()));
    }
    if (!v.allFinite()) throw FormatError("attention matrix has non-finite entries");
    if (a.synthetic_factor) return;
    if ((v.array() < Scalar(0)).any()) throw FormatError("attention matrix has negative entries");
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const Scalar s = v.row(i).sum();
        if (std::abs(s - Scalar(1)) > Scalar(kRowSumTolerance)) {
            throw FormatError("attention row " + std::to_string(i) + " sums to " + std::to_string(double(s)));
        }
    }
}

/// K = A·Aᵀ normalised to unit diagonal.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> correlation_from_factor(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    DenseMatrix<Scalar> k = a * a.transpose();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_sd(k.rows());
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        if (!(k(i, i) > Scalar(0))) {
            throw DegenerateError("attention row " + std::to_string(i) + " is all zero");
        }
        inv_sd(i) = Scalar(1) / std::sqrt(k(i, i));
    }
    DenseMatrix<Scalar> rho = inv_sd.asDiagonal() * k * inv_sd.asDiagonal();
    // Enforce exact symmetry, unit diagonal and the [-1, 1] range after rounding.
    rho = (rho + rho.transpose()).eval() * Scalar(0.5);
    rho.diagonal().setOnes();
    return rho.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
}

template <typename Scalar>
CorrelationMatrix<Scalar> correlation_from_attention(const AttentionMatrix<Scalar>& a,
                                                     std::int64_t effective_sample_size = 0) {
    validate(a);
    CorrelationMatrix<Scalar> out;
    out.values = correlation_from_factor(a.values);
    if (effective_sample_size > 0) {
        out.effective_sample_size = effective_sample_size;
    } else {
        out.effective_sample_size = a.synthetic_factor ? kPopulationSampleSize : a.tokens();
    }
    return out;
}

/// Correlation of a covariance matrix.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> covariance_to_correlation(const Eigen::MatrixBase<Derived>& sigma) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_sd = sigma.diagonal().cwiseSqrt().cwiseInverse();
    DenseMatrix<Scalar> rho = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
    rho.diagonal().setOnes();
    return rho;
}

/// Partial correlation of i and j given z, from the inverse of the
/// correlation submatrix over {i, j} ∪ z.
template <typename Derived>
typename Derived::Scalar partial_correlation(const Eigen::MatrixBase<Derived>& rho, Eigen::Index i, Eigen::Index j,
                                             std::span<const int> z) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = rho.rows();
    auto in_range = [n](Eigen::Index v) { return v >= 0 && v < n; };
    if (!in_range(i) || !in_range(j) || i == j) {
        throw Error("partial correlation needs two distinct in-range indices");
    }
    for (int v : z) {
        if (!in_range(v) || v == i || v == j) throw Error("conditioning index overlaps or out of range");
    }
    if (z.empty()) return rho(i, j);

    const Eigen::Index m = static_cast<Eigen::Index>(z.size()) + 2;
    std::vector<Eigen::Index> idx{i, j};
    idx.insert(idx.end(), z.begin(), z.end());
    DenseMatrix<Scalar> sub(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = rho(idx[r], idx[c]);

    Eigen::LDLT<DenseMatrix<Scalar>> ldlt(sub);
    const auto d = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || !(d.minCoeff() > Scalar(1e-12) * d.maxCoeff()) ||
        !(ldlt.rcond() > Scalar(1e-13))) {
        throw DegenerateError("singular correlation submatrix for (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    }
    // Only the leading 2x2 block of the precision matrix is needed.
    DenseMatrix<Scalar> rhs = DenseMatrix<Scalar>::Zero(m, 2);
    rhs(0, 0) = Scalar(1);
    rhs(1, 1) = Scalar(1);
    const DenseMatrix<Scalar> p = ldlt.solve(rhs);
    const Scalar denom = std::sqrt(p(0, 0) * p(1, 1));
    if (!(denom > Scalar(0))) throw DegenerateError("non-positive precision diagonal");
    const Scalar value = -p(1, 0) / denom;
    if (!std::isfinite(double(value)) || std::abs(value) > Scalar(1 + 1e-9)) {
        throw DegenerateError("partial correlation outside [-1, 1]");
    }
    return std::clamp(value, Scalar(-1), Scalar(1));
}

}  // namespace attncause
