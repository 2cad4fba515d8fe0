#include "curvwomb/differential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace curvwomb {

FieldConditioner::FieldConditioner(const KernelSpec& spec, const Mat& locations, const Vec& field_values,
                                   const Vec& field_mean, double nugget)
    : spec_(spec), locations_(locations) {
    const Eigen::Index L = locations.rows();
    if (L < 1) throw ConfigError("conditioning needs at least one location");
    if (field_values.size() != L || field_mean.size() != L)
        throw LengthMismatch("field values/mean length does not match the number of locations");
    if (!spec.curvature_capable())
        throw UnsupportedSmoothness("the curvature process does not exist for " + std::string(to_string(spec.family)));
    Mat sigma = spec.sigma2 * correlation_matrix(spec.family, spec.phi, locations);
    if (nugget > 0.0) sigma.diagonal().array() += nugget;
    chol_ = Cholesky(sigma);
    alpha_ = chol_.solve(Vec(field_values - field_mean));
    v0_ = differential_cross_cov(spec, Vec2::Zero());
}

FullDifferentialLaw FieldConditioner::law(const Vec2& s0, const MeanDerivatives& mean) const {
    const Eigen::Index L = locations_.rows();
    // Row i holds Cov(Y(s_i), LY(s0)) = first row of V(s_i - s0).
    Eigen::Matrix<double, Eigen::Dynamic, 6> c(L, 6);
    for (Eigen::Index i = 0; i < L; ++i) {
        const Vec2 delta = locations_.row(i).transpose() - s0;
        const CrossCovBlocks b = cross_cov_blocks(spec_, Displacement(delta), 2);
        c(i, 0) = b.k;
        c(i, 1) = -b.g[0];
        c(i, 2) = -b.g[1];
        c(i, 3) = b.h(0, 0);
        c(i, 4) = b.h(0, 1);
        c(i, 5) = b.h(1, 1);
    }
    FullDifferentialLaw out;
    Vec6 m;
    m << mean.value, mean.grad, mean.hess;
    out.mean = m + c.transpose() * alpha_;
    const Eigen::Matrix<double, Eigen::Dynamic, 6> w = chol_.llt.matrixL().solve(c);
    out.cov = v0_ - w.transpose() * w;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

DifferentialLaw conditional_differential(const KernelSpec& spec, const Mat& locations, const Vec& field_values,
                                         const Vec& field_mean, const MeanDerivatives& mean_derivs, const Vec2& s0) {
    return FieldConditioner(spec, locations, field_values, field_mean).law(s0, mean_derivs).differential();
}

double divergence(const DifferentialDraw& d) { return d.grad[0] + d.grad[1]; }
double laplacian(const DifferentialDraw& d) { return d.hess_vech[0] + d.hess_vech[2]; }
double aspect(const DifferentialDraw& d) { return std::atan2(d.grad[1], d.grad[0]); }

CurvatureSummary curvature_summary(const Vec3& h) {
    const double a = h[0], b = h[1], c = h[2];
    const double mid = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    CurvatureSummary out;
    out.eigen1 = mid + rad;
    out.eigen2 = mid - rad;
    out.gaussian = a * c - b * b;

    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
    if (std::abs(b) <= 1e-12 * scale) {
        out.theta_pc = std::abs(a) >= std::abs(c) ? 0.0 : std::numbers::pi / 2.0;
        return out;
    }
    // tan(theta) solves t^2 + h1 t - 1 = 0 with h1 = (a - c) / b.
    const double h1 = (a - c) / b;
    const double disc = std::sqrt(h1 * h1 + 4.0);
    auto normalize = [](double t) {
        double th = std::atan(t);
        if (th < 0.0) th += std::numbers::pi;
        return th;
    };
    auto curv = [&](double th) {
        const double cs = std::cos(th), sn = std::sin(th);
        return std::abs(a * cs * cs + 2.0 * b * cs * sn + c * sn * sn);
    };
    const double t1 = normalize(0.5 * (-h1 + disc));
    const double t2 = normalize(0.5 * (-h1 - disc));
    const double c1 = curv(t1), c2 = curv(t2);
    const double tol = 1e-12 * std::max(c1, c2);
    if (std::abs(c1 - c2) <= tol) out.theta_pc = std::min(t1, t2);
    else out.theta_pc = c1 > c2 ? t1 : t2;
    return out;
}

std::string_view to_string(GridField f) {
    switch (f) {
    case GridField::Z: return "Z";
    case GridField::D1: return "d1";
    case GridField::D2: return "d2";
    case GridField::D11: return "d11";
    case GridField::D12: return "d12";
    case GridField::D22: return "d22";
    case GridField::Divergence: return "divergence";
    case GridField::Laplacian: return "laplacian";
    case GridField::Eigen1: return "eigen1";
    case GridField::Eigen2: return "eigen2";
    case GridField::Gaussian: return "gaussian";
    case GridField::ThetaPC: return "theta_pc";
    case GridField::Aspect: return "aspect";
    }
    return "unknown";
}

GridField grid_field_from_string(std::string_view name) {
    for (GridField f : kAllGridFields)
        if (to_string(f) == name) return f;
    throw ConfigError("unknown grid field '" + std::string(name) + "'");
}

double field_value(GridField f, const DifferentialDraw& d) {
    switch (f) {
    case GridField::Z: return d.value;
    case GridField::D1: return d.grad[0];
    case GridField::D2: return d.grad[1];
    case GridField::D11: return d.hess_vech[0];
    case GridField::D12: return d.hess_vech[1];
    case GridField::D22: return d.hess_vech[2];
    case GridField::Divergence: return divergence(d);
    case GridField::Laplacian: return laplacian(d);
    case GridField::Eigen1: return curvature_summary(d).eigen1;
    case GridField::Eigen2: return curvature_summary(d).eigen2;
    case GridField::Gaussian: return curvature_summary(d).gaussian;
    case GridField::ThetaPC: return curvature_summary(d).theta_pc;
    case GridField::Aspect: return aspect(d);
    }
    return 0.0;
}

std::vector<std::vector<DifferentialDraw>> draw_differentials(const PosteriorChains& chains, const Mat& points,
                                                              const DifferentialSettings& settings) {
    chains.validate();
    if (settings.draw_stride < 1) throw ConfigError("draw_stride must be at least 1");
    if (points.cols() != 2) throw ConfigError("grid points must have two columns");
    if (!curvature_capable(chains.family))
        throw UnsupportedSmoothness("the curvature process does not exist for " + std::string(to_string(chains.family)));

    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> norm(0.0, 1.0);
    const Eigen::Index L = chains.n_locations();
    const Vec zero = Vec::Zero(L);
    std::vector<std::vector<DifferentialDraw>> out;
    for (Eigen::Index k = 0; k < chains.n_draws(); k += settings.draw_stride) {
        const FieldConditioner cond(chains.kernel(k), chains.locations, chains.Z.row(k).transpose(), zero);
        std::vector<DifferentialDraw> row(points.rows());
        for (Eigen::Index p = 0; p < points.rows(); ++p) {
            const Vec2 s0 = points.row(p).transpose();
            const FullDifferentialLaw law = cond.law(s0);
            Vec6 xi;
            for (int i = 0; i < 6; ++i) xi[i] = norm(rng);
            const Vec6 x = law.mean + Mat6(psd_sqrt(law.cov)) * xi;
            row[p] = {s0, x[0], x.segment<2>(1), x.tail<3>()};
        }
        out.push_back(std::move(row));
    }
    return out;
}

Vec latent_mean_surface(const PosteriorChains& chains, const Mat& points, int draw_stride) {
    chains.validate();
    if (draw_stride < 1) throw ConfigError("draw_stride must be at least 1");
    const Eigen::Index L = chains.n_locations();
    std::vector<Vec> per_draw;
    for (Eigen::Index k = 0; k < chains.n_draws(); k += draw_stride) {
        const double phi = chains.phi[k];
        const Cholesky rc(correlation_matrix(chains.family, phi, chains.locations));
        const Vec alpha = rc.solve(Vec(chains.Z.row(k).transpose()));
        Vec m(points.rows());
        for (Eigen::Index p = 0; p < points.rows(); ++p) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < L; ++i)
                acc += alpha[i] * correlation(chains.family, phi, (chains.locations.row(i) - points.row(p)).norm());
            m[p] = acc;
        }
        per_draw.push_back(std::move(m));
    }
    Vec out(points.rows());
    std::vector<double> buf(per_draw.size());
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
        for (std::size_t k = 0; k < per_draw.size(); ++k) buf[k] = per_draw[k][p];
        out[p] = median(buf);
    }
    return out;
}

const std::vector<Summary>& GridSummary::field(GridField f) const {
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == f) return stats[i];
    throw ConfigError("grid summary has no field '" + std::string(to_string(f)) + "'");
}

GridSummary summarize_draws(const std::vector<std::vector<DifferentialDraw>>& draws, const Mat& points, double alpha) {
    if (draws.empty()) throw EmptySamples("no differential draws to summarize");
    GridSummary g;
    g.points = points;
    g.prob = 1.0 - alpha;
    g.fields.assign(kAllGridFields.begin(), kAllGridFields.end());
    g.stats.assign(g.fields.size(), std::vector<Summary>(points.rows()));
    std::vector<double> buf(draws.size());
    for (std::size_t f = 0; f < g.fields.size(); ++f) {
        for (Eigen::Index p = 0; p < points.rows(); ++p) {
            for (std::size_t k = 0; k < draws.size(); ++k) buf[k] = field_value(g.fields[f], draws[k][p]);
            g.stats[f][p] = summarize(buf, g.prob);
        }
    }
    return g;
}

GridSummary sample_differentials(const PosteriorChains& chains, const Mat& grid, const DifferentialSettings& settings) {
    if (!(settings.alpha > 0.0 && settings.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    return summarize_draws(draw_differentials(chains, grid, settings), grid, settings.alpha);
}

}  // namespace curvwomb
