#include "curvwomb/kernels.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace curvwomb {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kSqrt5 = 2.2360679774997896964;

// Derivatives of F(q) with K(Delta) = F(||Delta||^2). The chain rule in q is
// free of 1/r singularities for every term that survives at Delta = 0.
struct QDerivs {
    double f0{0}, f1{0}, f2{0}, f3{0}, f4{0};
};

QDerivs q_derivs(const KernelSpec& spec, double r, int max_order) {
    QDerivs q;
    switch (spec.family) {
    case KernelFamily::SquaredExponential: {
        const double phi = spec.phi;
        const double e = spec.sigma2 * std::exp(-phi * r * r);
        q.f0 = e;
        q.f1 = -phi * e;
        q.f2 = phi * phi * e;
        q.f3 = -phi * phi * phi * e;
        q.f4 = phi * phi * phi * phi * e;
        break;
    }
    case KernelFamily::Matern52: {
        const double a = kSqrt5 * spec.phi;
        const double e = spec.sigma2 * std::exp(-a * r);
        const double a2 = a * a;
        const double a4 = a2 * a2;
        q.f0 = (1.0 + a * r + a2 * r * r / 3.0) * e;
        q.f1 = -(a2 / 6.0) * (1.0 + a * r) * e;
        q.f2 = (a4 / 12.0) * e;
        if (max_order > 2 && r >= kSwitchRadius) {
            q.f3 = -(a4 * a / 24.0) * e / r;
            q.f4 = (a4 * a / 48.0) * e * (a / (r * r) + 1.0 / (r * r * r));
        }
        break;
    }
    case KernelFamily::Matern32: {
        const double b = kSqrt3 * spec.phi;
        const double e = spec.sigma2 * std::exp(-b * r);
        q.f0 = (1.0 + b * r) * e;
        q.f1 = -(b * b / 2.0) * e;
        q.f2 = (r >= kSwitchRadius) ? b * b * b * e / (4.0 * r) : 0.0;
        break;
    }
    }
    return q;
}

constexpr std::array<std::array<int, 2>, 3> kVechIndex{{{0, 0}, {0, 1}, {1, 1}}};

inline double kron(int i, int j) { return i == j ? 1.0 : 0.0; }

}  // namespace

std::string_view to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::SquaredExponential: return "sqexp";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "sqexp" || name == "gaussian" || name == "squared_exponential") return KernelFamily::SquaredExponential;
    if (name == "matern32") return KernelFamily::Matern32;
    if (name == "matern52") return KernelFamily::Matern52;
    throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

bool spectral_capability(KernelFamily family, double nu) {
    if (family == KernelFamily::SquaredExponential) return true;
    return nu > 2.0;
}

KernelSpec::KernelSpec(KernelFamily f, double s2, double ph) : family(f), sigma2(s2), phi(ph) {
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw ConfigError("kernel sigma2 must be positive and finite");
    if (!(ph > 0.0) || !std::isfinite(ph)) throw ConfigError("kernel phi must be positive and finite");
}

RadialDerivatives radial_derivs(const KernelSpec& spec, double r) {
    RadialDerivatives d;
    switch (spec.family) {
    case KernelFamily::SquaredExponential: {
        const double phi = spec.phi;
        const double f = spec.sigma2 * std::exp(-phi * r * r);
        const double r2 = r * r;
        d.k0 = f;
        d.k1 = -2.0 * phi * r * f;
        d.k2 = (4.0 * phi * phi * r2 - 2.0 * phi) * f;
        d.k3 = (12.0 * phi * phi * r - 8.0 * phi * phi * phi * r2 * r) * f;
        d.k4 = (12.0 * phi * phi - 48.0 * phi * phi * phi * r2 + 16.0 * phi * phi * phi * phi * r2 * r2) * f;
        d.k1_over_r = -2.0 * phi * f;
        d.a0_over_r2 = 4.0 * phi * phi * f;
        d.k3_over_r = (12.0 * phi * phi - 8.0 * phi * phi * phi * r2) * f;
        break;
    }
    case KernelFamily::Matern52: {
        const double a = kSqrt5 * spec.phi;
        const double e = spec.sigma2 * std::exp(-a * r);
        const double a2 = a * a;
        const double a4 = a2 * a2;
        d.k0 = (1.0 + a * r + a2 * r * r / 3.0) * e;
        d.k1 = -(a2 / 3.0) * r * (1.0 + a * r) * e;
        d.k2 = -(a2 / 3.0) * (1.0 + a * r - a2 * r * r) * e;
        d.k3 = (a4 / 3.0) * r * (3.0 - a * r) * e;
        d.k4 = (a4 / 3.0) * (3.0 - 5.0 * a * r + a2 * r * r) * e;
        d.k1_over_r = -(a2 / 3.0) * (1.0 + a * r) * e;
        d.a0_over_r2 = (a4 / 3.0) * e;
        d.k3_over_r = (a4 / 3.0) * (3.0 - a * r) * e;
        break;
    }
    case KernelFamily::Matern32: {
        const double b = kSqrt3 * spec.phi;
        const double e = spec.sigma2 * std::exp(-b * r);
        const double b2 = b * b;
        d.k0 = (1.0 + b * r) * e;
        d.k1 = -b2 * r * e;
        d.k2 = -b2 * (1.0 - b * r) * e;
        d.k1_over_r = -b2 * e;
        d.a0_over_r2 = (r > 0.0) ? b2 * b * e / r : std::numeric_limits<double>::infinity();
        d.higher_available = false;
        break;
    }
    }
    return d;
}

CrossCovBlocks cross_cov_blocks(const KernelSpec& spec, const Displacement& d, int max_order) {
    if (max_order > 2 && !spec.curvature_capable())
        throw UnsupportedSmoothness("third/fourth kernel derivatives do not exist for " + std::string(to_string(spec.family)));

    CrossCovBlocks b;
    b.order = max_order > 2 ? 4 : 2;
    const double r = d.norm;
    const QDerivs q = q_derivs(spec, r, b.order);
    b.k = q.f0;

    if (r < kSwitchRadius) {
        // Analytic limits: odd orders vanish, the remaining terms are the
        // delta-only parts of the chain rule.
        b.h = 2.0 * q.f1 * Mat2::Identity();
        if (b.order == 4) {
            for (int a = 0; a < 3; ++a) {
                for (int c = 0; c < 3; ++c) {
                    const int i = kVechIndex[a][0], j = kVechIndex[a][1];
                    const int k = kVechIndex[c][0], l = kVechIndex[c][1];
                    b.t4(a, c) = 4.0 * q.f2 * (kron(i, j) * kron(k, l) + kron(i, k) * kron(j, l) + kron(i, l) * kron(j, k));
                }
            }
        }
        return b;
    }

    const Vec2& x = d.delta;
    b.g = 2.0 * q.f1 * x;
    b.h = 2.0 * q.f1 * Mat2::Identity() + 4.0 * q.f2 * x * x.transpose();
    if (b.order < 4) return b;

    auto third = [&](int i, int j, int k) {
        return 4.0 * q.f2 * (kron(i, j) * x[k] + kron(i, k) * x[j] + kron(j, k) * x[i]) + 8.0 * q.f3 * x[i] * x[j] * x[k];
    };
    auto fourth = [&](int i, int j, int k, int l) {
        const double pairs = kron(i, j) * kron(k, l) + kron(i, k) * kron(j, l) + kron(i, l) * kron(j, k);
        const double mixed = kron(i, j) * x[k] * x[l] + kron(i, k) * x[j] * x[l] + kron(i, l) * x[j] * x[k] +
                             kron(j, k) * x[i] * x[l] + kron(j, l) * x[i] * x[k] + kron(k, l) * x[i] * x[j];
        return 4.0 * q.f2 * pairs + 8.0 * q.f3 * mixed + 16.0 * q.f4 * x[i] * x[j] * x[k] * x[l];
    };
    for (int a = 0; a < 3; ++a) {
        const int i = kVechIndex[a][0], j = kVechIndex[a][1];
        for (int k = 0; k < 2; ++k) b.t3(a, k) = third(i, j, k);
        for (int c = 0; c < 3; ++c) b.t4(a, c) = fourth(i, j, kVechIndex[c][0], kVechIndex[c][1]);
    }
    return b;
}

Vec3 duplication_contraction(const Vec2& u, const Vec2& v) {
    return {v[0] * u[0], v[0] * u[1] + v[1] * u[0], v[1] * u[1]};
}

double directional_curvature_cov(const KernelSpec& spec, const Vec2& u, const Displacement& d) {
    if (!spec.curvature_capable())
        throw UnsupportedSmoothness("directional curvature does not exist for " + std::string(to_string(spec.family)));
    const double un = u.norm();
    const double scale = un * un * un * un;
    if (d.norm < kSwitchRadius) {
        const Vec3 c = duplication_contraction(u, u);
        return c.dot(cross_cov_blocks(spec, d, 4).t4 * c);
    }
    const RadialDerivatives rd = radial_derivs(spec, d.norm);
    const double proj = u.dot(d.delta) / (un * d.norm);
    const double a0 = 1.0 - proj * proj;
    return scale * (3.0 * (5.0 * a0 - 4.0) * a0 * rd.a0_over_r2 + 6.0 * (1.0 - a0) * a0 * rd.k3_over_r +
                    (1.0 - a0) * (1.0 - a0) * rd.k4);
}

Mat6 differential_cross_cov(const KernelSpec& spec, const Vec2& delta) {
    const CrossCovBlocks b = cross_cov_blocks(spec, Displacement(delta), 4);
    const Vec3 hv(b.h(0, 0), b.h(0, 1), b.h(1, 1));
    Mat6 v;
    // Entry (r, c) is (-1)^{order(c)} D_r D_c K(Delta).
    v(0, 0) = b.k;
    v.block<1, 2>(0, 1) = -b.g.transpose();
    v.block<1, 3>(0, 3) = hv.transpose();
    v.block<2, 1>(1, 0) = b.g;
    v.block<2, 2>(1, 1) = -b.h;
    v.block<2, 3>(1, 3) = b.t3.transpose();
    v.block<3, 1>(3, 0) = hv;
    v.block<3, 2>(3, 1) = -b.t3;
    v.block<3, 3>(3, 3) = b.t4;
    return v;
}

Eigen::Matrix3d gradient_cross_cov(const KernelSpec& spec, const Vec2& delta) {
    const CrossCovBlocks b = cross_cov_blocks(spec, Displacement(delta), 2);
    Eigen::Matrix3d v;
    v(0, 0) = b.k;
    v.block<1, 2>(0, 1) = -b.g.transpose();
    v.block<2, 1>(1, 0) = b.g;
    v.block<2, 2>(1, 1) = -b.h;
    return v;
}

double correlation(KernelFamily family, double phi, double r) {
    switch (family) {
    case KernelFamily::SquaredExponential: return std::exp(-phi * r * r);
    case KernelFamily::Matern52: {
        const double a = kSqrt5 * phi * r;
        return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    case KernelFamily::Matern32: {
        const double b = kSqrt3 * phi * r;
        return (1.0 + b) * std::exp(-b);
    }
    }
    return 0.0;
}

Mat correlation_matrix(KernelFamily family, double phi, const Mat& locations) {
    const Eigen::Index n = locations.rows();
    Mat r(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = (locations.row(i) - locations.row(j)).norm();
            r(i, j) = r(j, i) = correlation(family, phi, dist);
        }
    }
    return r;
}

}  // namespace curvwomb
