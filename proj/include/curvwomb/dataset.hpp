#pragma once

#include "curvwomb/types.hpp"

namespace curvwomb {

/// Point-referenced observations. `X` already contains the intercept column.
struct SpatialDataset {
    Mat locations;  // L x 2
    Mat X;          // L x p
    Vec y;          // L

    [[nodiscard]] Eigen::Index size() const { return locations.rows(); }
    [[nodiscard]] Eigen::Index n_covariates() const { return X.cols(); }

    /// Throws LengthMismatch, DuplicateLocation or ConfigError.
    void validate() const;
};

[[nodiscard]] double max_pairwise_distance(const Mat& locations);

}  // namespace curvwomb
