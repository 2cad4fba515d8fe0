#pragma once

#include "curvwomb/dataset.hpp"

#include <cstdint>

namespace curvwomb {

/// Unique third partials ordered (111, 112, 122, 222).
using Vec4 = Eigen::Vector4d;

struct SurfaceDerivatives {
    double value{0};
    Vec2 grad{Vec2::Zero()};
    Vec3 hess{Vec3::Zero()};  // vech (11, 12, 22)
    Vec4 third{Vec4::Zero()};
};

/// The two synthetic mean surfaces on the unit square:
///   1: 10 (sin 3 pi s1 + cos 3 pi s2)
///   2: 10 sin 3 pi s1 cos 3 pi s2
struct PatternOracle {
    int id{1};
    double tau2{1.0};

    PatternOracle() = default;
    PatternOracle(int pattern_id, double noise_variance);

    [[nodiscard]] double mean(const Vec2& s) const;
    [[nodiscard]] SurfaceDerivatives derivatives(const Vec2& s) const;
};

/// Uniform locations on [0,1]^2, y = mean + N(0, tau2), intercept-only design.
[[nodiscard]] SpatialDataset generate(const PatternOracle& pattern, int L, std::uint64_t seed);

/// n x n lattice on [lo, hi]^2 (rows are points, x varying fastest).
[[nodiscard]] Mat lattice(int n, double lo = 0.0, double hi = 1.0);

}  // namespace curvwomb
