#include "curvwomb/linalg.hpp"

#include <cmath>
#include <string>

namespace curvwomb {

Cholesky::Cholesky(const Mat& a) {
    const Eigen::Index n = a.rows();
    if (n == 0) {
        llt.compute(a);
        return;
    }
    llt.compute(a);
    if (llt.info() == Eigen::Success) return;

    const double scale = std::max(a.trace() / static_cast<double>(n), 1e-300);
    for (double rel = 1e-10; rel <= 1e-4 * 1.0000001; rel *= 10.0) {
        Mat b = a;
        b.diagonal().array() += rel * scale;
        llt.compute(b);
        if (llt.info() == Eigen::Success) {
            jitter = rel * scale;
            return;
        }
    }
    throw SingularCovariance("Cholesky factorization failed for a " + std::to_string(n) + "x" + std::to_string(n) +
                             " covariance after maximal jitter");
}

double Cholesky::log_det() const {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Mat psd_sqrt(const Mat& a) {
    Eigen::LLT<Mat> llt(a);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    const Vec vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * vals.asDiagonal();
}

}  // namespace curvwomb
