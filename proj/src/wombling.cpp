#include "curvwomb/wombling.hpp"

#include "curvwomb/linalg.hpp"
#include "curvwomb/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace curvwomb {

namespace {

inline void require_curvature(const KernelSpec& spec) {
    if (!spec.curvature_capable())
        throw UnsupportedSmoothness("curvature wombling is undefined for " + std::string(to_string(spec.family)));
}

// Weights picking the normal gradient and normal curvature out of LY.
struct Weights {
    Vec6 gradient;
    Vec6 curvature;
};

Weights weights_for(const Vec2& n) {
    Weights w;
    w.gradient << 0.0, n[0], n[1], 0.0, 0.0, 0.0;
    w.curvature << 0.0, 0.0, 0.0, duplication_contraction(n, n);
    return w;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

std::string_view to_string(WombMode m) { return m == WombMode::Joint ? "joint" : "independent"; }

WombMode womb_mode_from_string(std::string_view s) {
    if (s == "joint") return WombMode::Joint;
    if (s == "independent") return WombMode::Independent;
    throw ConfigError("unknown wombling mode '" + std::string(s) + "'");
}

Vec2 segment_cross_cov(const KernelSpec& spec, const Segment& seg, const Vec2& s_j, int n_quad_1d) {
    if (seg.length < 1e-12) return Vec2::Zero();
    const QuadratureRule rule = gauss_legendre(n_quad_1d, 0.0, seg.length);
    const Vec2& n = seg.u_perp;
    const Vec3 c = duplication_contraction(n, n);
    Vec2 out = Vec2::Zero();
    for (int q = 0; q < n_quad_1d; ++q) {
        const Vec2 delta = s_j - seg.point(rule.nodes[q]);
        const CrossCovBlocks b = cross_cov_blocks(spec, Displacement(delta), 2);
        const Vec3 hv(b.h(0, 0), b.h(0, 1), b.h(1, 1));
        out[0] += rule.weights[q] * (-b.g.dot(n));
        out[1] += rule.weights[q] * hv.dot(c);
    }
    return out;
}

Vec2 analytic_cross_cov_sqexp(const KernelSpec& spec, const Segment& seg, const Vec2& s_j) {
    if (spec.family != KernelFamily::SquaredExponential)
        throw WrongFamily("the closed-form cross-covariance needs the squared exponential kernel");
    const Vec2 delta = seg.start - s_j;
    const double a = seg.u_perp.dot(delta);
    const double b = seg.u.dot(delta);
    const double phi = spec.phi;
    const double root = std::sqrt(2.0 * phi);
    const double dphi = std_normal_cdf(root * (b + seg.length)) - std_normal_cdf(root * b);
    const double base = -2.0 * spec.sigma2 * std::sqrt(std::numbers::pi * phi) * std::exp(-phi * a * a) * dphi;
    return {base * a, base * (1.0 - 2.0 * phi * a * a)};
}

Mat2 segment_womb_cov(const KernelSpec& spec, const Segment& sa, const Segment& sb, int n_quad_2d) {
    require_curvature(spec);
    if (sa.length < 1e-12 || sb.length < 1e-12) return Mat2::Zero();
    const int side = quad_side_from_total(n_quad_2d);
    const QuadratureRule ra = gauss_legendre(side, 0.0, sa.length);
    const QuadratureRule rb = gauss_legendre(side, 0.0, sb.length);
    const Weights wa = weights_for(sa.u_perp), wb = weights_for(sb.u_perp);
    Mat2 out = Mat2::Zero();
    for (int i = 0; i < side; ++i) {
        const Vec2 pa = sa.point(ra.nodes[i]);
        for (int j = 0; j < side; ++j) {
            const Mat6 v = differential_cross_cov(spec, Vec2(pa - sb.point(rb.nodes[j])));
            const double w = ra.weights[i] * rb.weights[j];
            const Vec6 vg = v * wb.gradient;
            const Vec6 vc = v * wb.curvature;
            out(0, 0) += w * wa.gradient.dot(vg);
            out(0, 1) += w * wa.gradient.dot(vc);
            out(1, 0) += w * wa.curvature.dot(vg);
            out(1, 1) += w * wa.curvature.dot(vc);
        }
    }
    return out;
}

WomblingLaw wombling_law(const KernelSpec& spec, const Partition& partition, const Mat& locations, int n_quad_1d,
                         int n_quad_2d, WombMode mode) {
    require_curvature(spec);
    const auto n = static_cast<Eigen::Index>(partition.segments.size());
    WomblingLaw law;
    law.mean = Vec::Zero(2 * n);
    law.cov = Mat::Zero(2 * n, 2 * n);
    law.cross.resize(locations.rows(), 2 * n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const Segment& sa = partition.segments[a];
        for (Eigen::Index j = 0; j < locations.rows(); ++j)
            law.cross.block<1, 2>(j, 2 * a) = segment_cross_cov(spec, sa, locations.row(j).transpose(), n_quad_1d).transpose();
        const Eigen::Index last = mode == WombMode::Joint ? n : a + 1;
        for (Eigen::Index b = a; b < last; ++b) {
            const Mat2 k = segment_womb_cov(spec, sa, partition.segments[b], n_quad_2d);
            law.cov.block<2, 2>(2 * a, 2 * b) = k;
            if (b != a) law.cov.block<2, 2>(2 * b, 2 * a) = k.transpose();
        }
    }
    law.cov = 0.5 * (law.cov + law.cov.transpose()).eval();
    return law;
}

WomblingResult summarize_wombling(const Partition& partition, Mat total_gradient, Mat total_curvature, double alpha,
                                  WombMode mode) {
    const Eigen::Index draws = total_gradient.rows();
    const auto n = static_cast<Eigen::Index>(partition.segments.size());
    if (draws == 0) throw EmptySamples("no wombling draws to summarize");
    if (total_gradient.cols() != n || total_curvature.cols() != n || total_curvature.rows() != draws)
        throw LengthMismatch("wombling draw matrices do not match the partition");
    WomblingResult r;
    r.partition = partition;
    r.mode = mode;
    r.approximate = mode == WombMode::Independent;
    r.prob = 1.0 - alpha;

    std::vector<double> buf(draws);
    auto summ = [&](auto&& fill) {
        for (Eigen::Index k = 0; k < draws; ++k) buf[k] = fill(k);
        return summarize(buf, r.prob);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        const Segment& s = partition.segments[i];
        SegmentSummary ss;
        ss.index = static_cast<std::size_t>(i);
        ss.start = s.start;
        ss.length = s.length;
        ss.failed = !total_gradient.col(i).allFinite() || !total_curvature.col(i).allFinite();
        if (!ss.failed) {
            ss.total_gradient = summ([&](auto k) { return total_gradient(k, i); });
            ss.total_curvature = summ([&](auto k) { return total_curvature(k, i); });
            ss.avg_gradient = summ([&](auto k) { return total_gradient(k, i) / s.length; });
            ss.avg_curvature = summ([&](auto k) { return total_curvature(k, i) / s.length; });
        }
        r.segments.push_back(ss);
    }
    const double len = arc_length(partition);
    r.curve.length = len;
    const Vec g = total_gradient.rowwise().sum();
    const Vec c = total_curvature.rowwise().sum();
    if (g.allFinite() && c.allFinite()) {
        r.curve.total_gradient = summ([&](auto k) { return g[k]; });
        r.curve.total_curvature = summ([&](auto k) { return c[k]; });
        r.curve.avg_gradient = summ([&](auto k) { return g[k] / len; });
        r.curve.avg_curvature = summ([&](auto k) { return c[k] / len; });
    }
    r.total_gradient = std::move(total_gradient);
    r.total_curvature = std::move(total_curvature);
    return r;
}

WomblingResult sample_wombling(const PosteriorChains& chains, const Partition& partition, const WomblingSettings& settings) {
    chains.validate();
    if (settings.draw_stride < 1) throw ConfigError("draw_stride must be at least 1");
    if (!(settings.alpha > 0.0 && settings.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (partition.segments.empty()) throw EmptyCurve("partition has no segments");
    if (!curvature_capable(chains.family))
        throw UnsupportedSmoothness("curvature wombling is undefined for " + std::string(to_string(chains.family)));
    (void)quad_side_from_total(settings.n_quad_2d);

    const auto n = static_cast<Eigen::Index>(partition.segments.size());
    std::vector<Eigen::Index> rows;
    for (Eigen::Index k = 0; k < chains.n_draws(); k += settings.draw_stride) rows.push_back(k);
    Mat g(static_cast<Eigen::Index>(rows.size()), n), c(static_cast<Eigen::Index>(rows.size()), n);

    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> norm(0.0, 1.0);

    // Unit-variance quantities depend on phi only, and phi repeats whenever
    // the Metropolis step rejects, so the last factorization is reused.
    double cached_phi = -1.0;
    Mat projector;   // R^{-1} gamma, L x 2n
    Mat cond_sqrt;   // square root of (K - gamma^T R^{-1} gamma), 2n x 2n
    std::vector<Mat> block_sqrt;
    bool failed = false;

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::Index k = rows[r];
        const double phi = chains.phi[k];
        if (phi != cached_phi) {
            const KernelSpec unit(chains.family, 1.0, phi);
            failed = false;
            try {
                const WomblingLaw law = wombling_law(unit, partition, chains.locations, settings.n_quad_1d,
                                                     settings.n_quad_2d, settings.mode);
                const Cholesky rc(correlation_matrix(chains.family, phi, chains.locations));
                projector = rc.solve(law.cross);
                Mat cond = law.cov - law.cross.transpose() * projector;
                cond = 0.5 * (cond + cond.transpose()).eval();
                if (!cond.allFinite()) throw SingularCovariance("non-finite wombling covariance");
                if (settings.mode == WombMode::Joint) {
                    cond_sqrt = psd_sqrt(cond);
                } else {
                    block_sqrt.assign(n, Mat());
                    for (Eigen::Index i = 0; i < n; ++i) block_sqrt[i] = psd_sqrt(cond.block(2 * i, 2 * i, 2, 2));
                }
            } catch (const SingularCovariance&) {
                failed = true;
            }
            cached_phi = phi;
        }
        Vec xi(2 * n);
        for (Eigen::Index i = 0; i < 2 * n; ++i) xi[i] = norm(rng);
        if (failed) {
            g.row(r).setConstant(std::numeric_limits<double>::quiet_NaN());
            c.row(r).setConstant(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double sd = std::sqrt(chains.sigma2[k]);
        Vec draw = projector.transpose() * chains.Z.row(k).transpose();
        if (settings.mode == WombMode::Joint) {
            draw += sd * (cond_sqrt * xi);
        } else {
            for (Eigen::Index i = 0; i < n; ++i) draw.segment<2>(2 * i) += sd * (block_sqrt[i] * xi.segment<2>(2 * i));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            g(r, i) = draw[2 * i];
            c(r, i) = draw[2 * i + 1];
        }
    }
    return summarize_wombling(partition, std::move(g), std::move(c), settings.alpha, settings.mode);
}

WomblingResult riemann_wombling(const std::vector<std::vector<DifferentialDraw>>& draws, const Partition& partition,
                                double alpha) {
    const auto n = static_cast<Eigen::Index>(partition.segments.size());
    const auto m = static_cast<Eigen::Index>(draws.size());
    Mat g(m, n), c(m, n);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (static_cast<Eigen::Index>(draws[k].size()) != n)
            throw LengthMismatch("need one differential draw per segment start");
        for (Eigen::Index i = 0; i < n; ++i) {
            const Segment& s = partition.segments[i];
            const DifferentialDraw& d = draws[k][i];
            g(k, i) = s.length * s.u_perp.dot(d.grad);
            c(k, i) = s.length * duplication_contraction(s.u_perp, s.u_perp).dot(d.hess_vech);
        }
    }
    return summarize_wombling(partition, std::move(g), std::move(c), alpha, WombMode::Joint);
}

namespace {

Vec2 integrand(const SurfaceDerivatives& d, const Vec2& dir) {
    return {dir.dot(d.grad), duplication_contraction(dir, dir).dot(d.hess)};
}

TrueWombling finish(std::vector<Vec2> totals, const Partition& p) {
    TrueWombling t;
    t.segment_totals = std::move(totals);
    for (const Vec2& v : t.segment_totals) t.curve_total += v;
    const double len = arc_length(p);
    t.curve_average = len > 0.0 ? Vec2(t.curve_total / len) : Vec2::Zero();
    return t;
}

}  // namespace

TrueWombling true_wombling(const SurfaceOracle& oracle, const Partition& partition, int nodes, WombDirection direction) {
    std::vector<Vec2> totals;
    for (const Segment& s : partition.segments) {
        const Vec2 dir = direction == WombDirection::Normal ? s.u_perp : s.u;
        const QuadratureRule rule = gauss_legendre(nodes, 0.0, s.length);
        Vec2 acc = Vec2::Zero();
        for (int q = 0; q < nodes; ++q) acc += rule.weights[q] * integrand(oracle(s.point(rule.nodes[q])), dir);
        totals.push_back(acc);
    }
    return finish(std::move(totals), partition);
}

TrueWombling riemann_true(const SurfaceOracle& oracle, const Partition& partition, WombDirection direction) {
    std::vector<Vec2> totals;
    for (const Segment& s : partition.segments) {
        const Vec2 dir = direction == WombDirection::Normal ? s.u_perp : s.u;
        totals.push_back(s.length * integrand(oracle(s.start), dir));
    }
    return finish(std::move(totals), partition);
}

ScalarGrid posterior_surface(const PosteriorChains& chains, int n, const Vec2& lo, const Vec2& hi, int draw_stride,
                             bool mask_hull) {
    chains.validate();
    if (n < 2) throw ConfigError("surface resolution must be at least 2");
    if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw ConfigError("surface bounds are empty");
    ScalarGrid surface;
    surface.xs = Vec::LinSpaced(n, lo[0], hi[0]);
    surface.ys = Vec::LinSpaced(n, lo[1], hi[1]);
    Mat pts(static_cast<Eigen::Index>(n) * n, 2);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) pts.row(j * n + i) << surface.xs[i], surface.ys[j];
    const Vec zbar = latent_mean_surface(chains, pts, draw_stride);
    const Vec b0 = chains.beta.col(0);
    const double beta0 = median({b0.data(), static_cast<std::size_t>(b0.size())});
    surface.values.resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) surface.values(j, i) = beta0 + zbar[j * n + i];
    if (mask_hull) mask_outside_convex_hull(surface, chains.locations);
    return surface;
}

}  // namespace curvwomb
