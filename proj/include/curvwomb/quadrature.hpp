#pragma once

#include <vector>

namespace curvwomb {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
[[nodiscard]] const QuadratureRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
[[nodiscard]] QuadratureRule gauss_legendre(int n, double a, double b);

/// Integer square root of n; throws ConfigError unless n is a perfect square.
[[nodiscard]] int quad_side_from_total(int n_total);

}  // namespace curvwomb
