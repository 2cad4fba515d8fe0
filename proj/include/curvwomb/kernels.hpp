#pragma once

// Isotropic covariance kernels on R^2 and their derivatives up to fourth
// order, assembled into the cross-covariance blocks of the joint process
// (Y, grad Y, vech Hess Y).
//
// Conventions used throughout the library:
//   * Delta = s - s'.
//   * vech ordering is (11, 12, 22).
//   * third derivatives are stored 3x2: row = vech index, column = the
//     extra differentiation coordinate.

#include "curvwomb/types.hpp"

#include <string_view>

namespace curvwomb {

enum class KernelFamily { SquaredExponential, Matern32, Matern52 };

[[nodiscard]] std::string_view to_string(KernelFamily family);
[[nodiscard]] KernelFamily kernel_family_from_string(std::string_view name);

/// True iff the fourth derivative of the radial profile exists at 0, i.e. the
/// curvature process is well defined.
[[nodiscard]] constexpr bool curvature_capable(KernelFamily family) noexcept {
    return family != KernelFamily::Matern32;
}

/// Existence of the curvature process from the spectral fourth moment. For the
/// squared exponential `nu` is ignored; for the Matern families `nu` must be
/// the smoothness (only 3/2 and 5/2 are implemented, but the rule is nu > 2).
[[nodiscard]] bool spectral_capability(KernelFamily family, double nu);

struct KernelSpec {
    KernelFamily family{KernelFamily::Matern52};
    double sigma2{1.0};
    double phi{1.0};

    KernelSpec() = default;
    KernelSpec(KernelFamily f, double s2, double ph);

    [[nodiscard]] bool curvature_capable() const noexcept { return curvwomb::curvature_capable(family); }
    [[nodiscard]] KernelSpec with_sigma2(double s2) const { return {family, s2, phi}; }
};

struct Displacement {
    Vec2 delta{Vec2::Zero()};
    double norm{0.0};

    Displacement() = default;
    explicit Displacement(const Vec2& d) : delta(d), norm(d.norm()) {}
};

/// K~(r) and its radial derivatives. `k3`/`k4` are meaningless when
/// `higher_available` is false (Matern 3/2).
///
/// The three auxiliary quantities are the ratios that appear in the isotropic
/// chain rule, evaluated in closed form so that they stay accurate as r -> 0:
///   k1_over_r  = k1 / r
///   a0_over_r2 = (k2 - k1 / r) / r^2
///   k3_over_r  = k3 / r
struct RadialDerivatives {
    double k0{0}, k1{0}, k2{0}, k3{0}, k4{0};
    bool higher_available{true};
    double k1_over_r{0};
    double a0_over_r2{0};
    double k3_over_r{0};
};

[[nodiscard]] RadialDerivatives radial_derivs(const KernelSpec& spec, double r);

struct CrossCovBlocks {
    double k{0};
    Vec2 g{Vec2::Zero()};
    Mat2 h{Mat2::Zero()};
    Mat32 t3{Mat32::Zero()};
    Mat3 t4{Mat3::Zero()};
    /// Highest derivative order filled in (2 or 4).
    int order{4};
};

/// Below this radius the general formulas are replaced by their analytic
/// Delta -> 0 limits.
inline constexpr double kSwitchRadius = 1e-8;

/// Derivative blocks of K at Delta. `max_order` is 2 (k, g, h) or 4 (adds t3,
/// t4). Throws UnsupportedSmoothness when order 4 is requested for Matern 3/2.
[[nodiscard]] CrossCovBlocks cross_cov_blocks(const KernelSpec& spec, const Displacement& d, int max_order = 4);

/// c_{u,v} = (u (x) v)^T D_2 = (u1 v1, u1 v2 + u2 v1, u2 v2).
[[nodiscard]] Vec3 duplication_contraction(const Vec2& u, const Vec2& v);

/// Cov(D2_{u,u} Y(s), D2_{u,u} Y(s')) via the scalar a0 expansion.
[[nodiscard]] double directional_curvature_cov(const KernelSpec& spec, const Vec2& u, const Displacement& d);

/// The 6x6 cross-covariance V(Delta) = Cov(LY(s), LY(s')) with
/// LY = (Y, d1 Y, d2 Y, d11 Y, d12 Y, d22 Y) and Delta = s - s'.
[[nodiscard]] Mat6 differential_cross_cov(const KernelSpec& spec, const Vec2& delta);

/// Same as differential_cross_cov but only the (Y, grad) 3x3 corner is
/// required; works for every family.
[[nodiscard]] Eigen::Matrix3d gradient_cross_cov(const KernelSpec& spec, const Vec2& delta);

/// Correlation rho(r) = K~(r) / sigma2.
[[nodiscard]] double correlation(KernelFamily family, double phi, double r);

/// L x L correlation matrix R(phi) for the given locations (rows are points).
[[nodiscard]] Mat correlation_matrix(KernelFamily family, double phi, const Mat& locations);

}  // namespace curvwomb
