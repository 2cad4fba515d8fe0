#include "doctest.h"

#include "curvwomb/kernels.hpp"

#include "../common/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace curvwomb;
using doctest::Approx;

namespace {

constexpr int kCounts[3][2] = {{2, 0}, {1, 1}, {0, 2}};

double radial_fd(const KernelSpec& s, double r, int order) {
    const double h = 1e-3;
    auto k = [&](double x) { return static_cast<double>(oracle::kernel_ld(s.family, s.sigma2, s.phi, x, 0.0L)); };
    if (order == 1) return (k(r + h) - k(r - h)) / (2 * h);
    return (k(r + h) - 2 * k(r) + k(r - h)) / (h * h);
}

}  // namespace

TEST_CASE("radial derivatives at the origin and off it") {
    const RadialDerivatives se0 = radial_derivs({KernelFamily::SquaredExponential, 1.0, 1.0}, 0.0);
    CHECK(se0.k0 == 1.0);
    CHECK(se0.k1 == 0.0);
    CHECK(radial_derivs({KernelFamily::Matern52, 1.0, 1.0}, 0.0).k0 == 1.0);

    const KernelSpec s(KernelFamily::SquaredExponential, 1.0, 2.0);
    const RadialDerivatives d = radial_derivs(s, 0.5);
    CHECK(d.k0 == Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(d.k1 == Approx(radial_fd(s, 0.5, 1)).epsilon(1e-5));
    CHECK(d.k2 == Approx(radial_fd(s, 0.5, 2)).epsilon(1e-5));

    const KernelSpec m(KernelFamily::Matern52, 1.3, 0.8);
    for (double r : {0.1, 0.7, 2.0}) {
        const RadialDerivatives dm = radial_derivs(m, r);
        CHECK(dm.k1 == Approx(radial_fd(m, r, 1)).epsilon(1e-5));
        CHECK(dm.k2 == Approx(radial_fd(m, r, 2)).epsilon(1e-5));
        CHECK(dm.k1_over_r == Approx(dm.k1 / r).epsilon(1e-12));
        CHECK(dm.a0_over_r2 == Approx((dm.k2 - dm.k1 / r) / (r * r)).epsilon(1e-9));
        CHECK(dm.k3_over_r == Approx(dm.k3 / r).epsilon(1e-12));
    }
}

TEST_CASE("V(0) closed forms") {
    const CrossCovBlocks se = cross_cov_blocks({KernelFamily::SquaredExponential, 1.0, 1.0}, Displacement());
    CHECK(se.h.isApprox(-2.0 * Mat2::Identity()));
    CHECK(se.t4(0, 0) == 12.0);
    CHECK(se.t4(2, 2) == 12.0);
    CHECK(se.t4(1, 1) == 4.0);
    CHECK(se.t4(0, 2) == 4.0);

    const CrossCovBlocks m = cross_cov_blocks({KernelFamily::Matern52, 1.0, 1.0}, Displacement());
    CHECK(m.h(0, 0) == Approx(-5.0 / 3.0));
    CHECK(m.t4(0, 0) == Approx(25.0));
}

TEST_CASE("gradient at Delta = (1, 0)") {
    const CrossCovBlocks b = cross_cov_blocks({KernelFamily::SquaredExponential, 1.0, 1.0}, Displacement(Vec2(1, 0)));
    CHECK(b.g[0] == Approx(-2.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(b.g[1] == 0.0);
    CHECK(b.g[0] == Approx(oracle::fd_partial(KernelFamily::SquaredExponential, 1, 1, 1, 0, 1, 0)).epsilon(1e-8));
}

TEST_CASE("derivative blocks against nested finite differences") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5), par(0.5, 2.5);
    for (KernelFamily f : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
        for (int t = 0; t < 10; ++t) {
            const double s2 = par(rng), phi = par(rng);
            const Vec2 d(u(rng), u(rng));
            if (d.norm() < 0.05) continue;
            const CrossCovBlocks b = cross_cov_blocks({f, s2, phi}, Displacement(d));
            auto fd = [&](int a, int c) { return oracle::fd_partial(f, s2, phi, d[0], d[1], a, c); };
            const double scale3 = b.t3.cwiseAbs().maxCoeff(), scale4 = b.t4.cwiseAbs().maxCoeff();
            for (int a = 0; a < 3; ++a) {
                for (int k = 0; k < 2; ++k)
                    CHECK(std::abs(b.t3(a, k) - fd(kCounts[a][0] + (k == 0), kCounts[a][1] + (k == 1))) <= 1e-5 * scale3);
                for (int c = 0; c < 3; ++c)
                    CHECK(std::abs(b.t4(a, c) - fd(kCounts[a][0] + kCounts[c][0], kCounts[a][1] + kCounts[c][1])) <=
                          1e-3 * scale4);
            }
        }
    }
}

TEST_CASE("blocks are continuous across the switch radius") {
    for (KernelFamily f : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
        const KernelSpec s(f, 1.0, 1.0);
        const CrossCovBlocks at0 = cross_cov_blocks(s, Displacement());
        const CrossCovBlocks near = cross_cov_blocks(s, Displacement(Vec2(2e-8, 1e-8)));
        CHECK((at0.h - near.h).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((at0.t4 - near.t4).cwiseAbs().maxCoeff() < 1e-5 * at0.t4.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("duplication contraction") {
    CHECK(duplication_contraction(Vec2(1, 0), Vec2(1, 0)).isApprox(Vec3(1, 0, 0)));
    CHECK(duplication_contraction(Vec2(1, 0), Vec2(0, 1)).isApprox(Vec3(0, 1, 0)));
    const double r = 1.0 / std::sqrt(2.0);
    const Vec3 c = duplication_contraction(Vec2(r, r), Vec2(r, r));
    // Kronecker product u (x) v = (u1v1, u1v2, u2v1, u2v2) times the duplication matrix.
    Eigen::Matrix<double, 4, 3> D;
    D << 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1;
    const Eigen::Vector4d kron(r * r, r * r, r * r, r * r);
    CHECK(c.isApprox(D.transpose() * kron));
    CHECK(c.isApprox(Vec3(0.5, 1.0, 0.5)));
}

TEST_CASE("directional curvature covariance") {
    CHECK(directional_curvature_cov({KernelFamily::SquaredExponential, 1, 1}, Vec2(1, 0), Displacement()) == Approx(12.0));
    CHECK(directional_curvature_cov({KernelFamily::Matern52, 2, 1}, Vec2(0, 1), Displacement()) == Approx(50.0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (KernelFamily f : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
        for (int t = 0; t < 20; ++t) {
            const KernelSpec s(f, 1.0 + u(rng) * 0.5, 1.0 + u(rng) * 0.5);
            const Vec2 dir(u(rng), u(rng)), d(u(rng), u(rng));
            const Vec3 c = duplication_contraction(dir, dir);
            const double tensor = c.dot(cross_cov_blocks(s, Displacement(d)).t4 * c);
            CHECK(directional_curvature_cov(s, dir, Displacement(d)) == Approx(tensor).epsilon(1e-10));
        }
    }
    CHECK(directional_curvature_cov({KernelFamily::SquaredExponential, 1, 1}, Vec2(1, 0), Displacement(Vec2(0, 1))) ==
          Approx(duplication_contraction(Vec2(1, 0), Vec2(1, 0))
                     .dot(cross_cov_blocks({KernelFamily::SquaredExponential, 1, 1}, Displacement(Vec2(0, 1))).t4 *
                          duplication_contraction(Vec2(1, 0), Vec2(1, 0))))
              .epsilon(1e-10));
}

TEST_CASE("smoothness capability") {
    CHECK(spectral_capability(KernelFamily::SquaredExponential, 0.0));
    CHECK_FALSE(spectral_capability(KernelFamily::Matern32, 1.5));
    CHECK(spectral_capability(KernelFamily::Matern52, 2.5));
    CHECK_FALSE(curvature_capable(KernelFamily::Matern32));
    CHECK_THROWS_AS((void)cross_cov_blocks({KernelFamily::Matern32, 1, 1}, Displacement(Vec2(0.3, 0)), 4),
                    UnsupportedSmoothness);
    CHECK_NOTHROW((void)gradient_cross_cov({KernelFamily::Matern32, 1, 1}, Vec2(0.3, 0)));
}

TEST_CASE("V(Delta) symmetry: V(-Delta) = V(Delta)^T") {
    const KernelSpec s(KernelFamily::Matern52, 1.4, 1.1);
    const Vec2 d(0.3, -0.7);
    CHECK(differential_cross_cov(s, -d).isApprox(differential_cross_cov(s, d).transpose(), 1e-12));
}

TEST_CASE("family names and validation") {
    CHECK(kernel_family_from_string("gaussian") == KernelFamily::SquaredExponential);
    CHECK(kernel_family_from_string(to_string(KernelFamily::Matern52)) == KernelFamily::Matern52);
    CHECK_THROWS_AS((void)kernel_family_from_string("cauchy"), ConfigError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::Matern52, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::Matern52, 1.0, 0.0), ConfigError);
}

TEST_CASE("correlation matrix") {
    Mat locs(3, 2);
    locs << 0, 0, 1, 0, 0, 2;
    const Mat r = correlation_matrix(KernelFamily::SquaredExponential, 0.5, locs);
    CHECK(r(0, 0) == 1.0);
    CHECK(r(0, 1) == Approx(std::exp(-0.5)));
    CHECK(r(1, 2) == Approx(std::exp(-0.5 * 5.0)));
    CHECK(r.isApprox(r.transpose()));
}
