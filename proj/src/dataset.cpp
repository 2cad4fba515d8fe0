#include "curvwomb/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace curvwomb {

void SpatialDataset::validate() const {
    const Eigen::Index L = locations.rows();
    if (locations.cols() != 2) throw ConfigError("locations must have two columns");
    if (X.rows() != L || y.size() != L)
        throw LengthMismatch("dataset has " + std::to_string(L) + " locations but X has " + std::to_string(X.rows()) +
                             " rows and y has " + std::to_string(y.size()) + " entries");
    if (L < X.cols()) throw ConfigError("fewer observations than covariates");
    if (!locations.allFinite() || !X.allFinite() || !y.allFinite()) throw ConfigError("dataset contains non-finite values");

    std::vector<Eigen::Index> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        return locations(a, 0) < locations(b, 0) || (locations(a, 0) == locations(b, 0) && locations(a, 1) < locations(b, 1));
    });
    for (Eigen::Index k = 0; k < L; ++k) {
        const auto i = order[k];
        for (Eigen::Index m = k + 1; m < L; ++m) {
            const auto j = order[m];
            if (locations(j, 0) - locations(i, 0) > 1e-12) break;
            if (std::abs(locations(j, 1) - locations(i, 1)) <= 1e-12)
                throw DuplicateLocation("rows " + std::to_string(std::min(i, j) + 1) + " and " +
                                        std::to_string(std::max(i, j) + 1) + " share the same location");
        }
    }
}

double max_pairwise_distance(const Mat& locations) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < locations.rows(); ++i)
        for (Eigen::Index j = i + 1; j < locations.rows(); ++j)
            best = std::max(best, (locations.row(i) - locations.row(j)).norm());
    return best;
}

}  // namespace curvwomb
