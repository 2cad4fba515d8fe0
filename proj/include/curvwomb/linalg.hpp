#pragma once

#include "curvwomb/types.hpp"

namespace curvwomb {

/// Cholesky factor of an SPD matrix. If the plain factorization fails, a
/// diagonal jitter of 1e-10 * trace / n is added and escalated by factors of
/// ten up to 1e-4 * trace / n; beyond that SingularCovariance is thrown.
struct Cholesky {
    Eigen::LLT<Mat> llt;
    double jitter{0.0};

    Cholesky() = default;
    explicit Cholesky(const Mat& a);

    [[nodiscard]] Eigen::Index size() const { return llt.rows(); }
    template <class B>
    [[nodiscard]] auto solve(const Eigen::MatrixBase<B>& b) const {
        return llt.solve(b).eval();
    }
    /// L b
    template <class B>
    [[nodiscard]] auto apply_lower(const Eigen::MatrixBase<B>& b) const {
        return (llt.matrixL() * b).eval();
    }
    /// L^{-1} b
    template <class B>
    [[nodiscard]] auto solve_lower(const Eigen::MatrixBase<B>& b) const {
        return llt.matrixL().solve(b).eval();
    }
    [[nodiscard]] double log_det() const;
};

/// Lower Cholesky factor of a small symmetric PSD matrix, tolerant of exact
/// zeros and tiny negative eigenvalues from round-off (clipped to 0).
[[nodiscard]] Mat psd_sqrt(const Mat& a);

}  // namespace curvwomb
