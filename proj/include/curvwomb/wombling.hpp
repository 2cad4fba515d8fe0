#pragma once

// Posterior inference for curvilinear wombling measures: line integrals of
// the normal-direction gradient (Gamma1) and curvature (Gamma2) of the latent
// surface along a partitioned curve.

#include "curvwomb/curves.hpp"
#include "curvwomb/differential.hpp"
#include "curvwomb/kernels.hpp"
#include "curvwomb/mcmc.hpp"
#include "curvwomb/simulate.hpp"
#include "curvwomb/summary.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace curvwomb {

/// (Cov(Y(s_j), Gamma1), Cov(Y(s_j), Gamma2)) for one segment, by n-node
/// Gauss-Legendre quadrature.
[[nodiscard]] Vec2 segment_cross_cov(const KernelSpec& spec, const Segment& seg, const Vec2& s_j, int n_quad_1d = 10);

/// Closed form of segment_cross_cov for the squared exponential kernel.
/// Throws WrongFamily otherwise.
[[nodiscard]] Vec2 analytic_cross_cov_sqexp(const KernelSpec& spec, const Segment& seg, const Vec2& s_j);

/// 2x2 covariance between (Gamma1, Gamma2) of segment a and of segment b,
/// by an n_quad_2d-node tensor Gauss-Legendre rule.
[[nodiscard]] Mat2 segment_womb_cov(const KernelSpec& spec, const Segment& a, const Segment& b, int n_quad_2d = 100);

enum class WombMode {
    Joint,        // full cross-segment covariance (exact joint law)
    Independent,  // segments treated as independent (approximate)
};

[[nodiscard]] std::string_view to_string(WombMode m);
[[nodiscard]] WombMode womb_mode_from_string(std::string_view s);

/// Joint Gaussian law of (Gamma1_1, Gamma2_1, ..., Gamma1_n, Gamma2_n) before
/// conditioning: zero mean, covariance `cov`, cross-covariance `cross` with
/// the field values at the observed locations (L x 2n).
struct WomblingLaw {
    Vec mean;
    Mat cov;
    Mat cross;
};

[[nodiscard]] WomblingLaw wombling_law(const KernelSpec& spec, const Partition& partition, const Mat& locations,
                                       int n_quad_1d = 10, int n_quad_2d = 100, WombMode mode = WombMode::Joint);

struct WomblingSettings {
    int n_quad_1d{10};
    int n_quad_2d{100};
    double alpha{0.05};
    WombMode mode{WombMode::Joint};
    std::uint64_t seed{1};
    int draw_stride{1};
};

struct SegmentSummary {
    std::size_t index{0};
    Vec2 start{Vec2::Zero()};
    double length{0.0};
    Summary avg_gradient, avg_curvature;
    Summary total_gradient, total_curvature;
    bool failed{false};
};

struct CurveSummary {
    double length{0.0};
    Summary avg_gradient, avg_curvature;
    Summary total_gradient, total_curvature;
};

struct WomblingResult {
    Partition partition;
    WombMode mode{WombMode::Joint};
    bool approximate{false};
    double prob{0.95};
    Mat total_gradient;   // draws x segments
    Mat total_curvature;  // draws x segments
    std::vector<SegmentSummary> segments;
    CurveSummary curve;
};

/// Builds the per-segment and curve-level summaries from total-measure draws.
[[nodiscard]] WomblingResult summarize_wombling(const Partition& partition, Mat total_gradient, Mat total_curvature,
                                                double alpha, WombMode mode);

/// One draw of every segment measure per retained (stride-selected) MCMC draw.
[[nodiscard]] WomblingResult sample_wombling(const PosteriorChains& chains, const Partition& partition,
                                             const WomblingSettings& settings);

/// Riemann-sum alternative from differential draws at the segment starts:
/// draws[k][i] belongs to segment i.
[[nodiscard]] WomblingResult riemann_wombling(const std::vector<std::vector<DifferentialDraw>>& draws,
                                              const Partition& partition, double alpha);

/// Fitted surface median(beta0) + latent_mean_surface on an n x n lattice
/// over [lo, hi], for tracing level curves. Cells outside the convex hull of
/// the observed locations are NaN when `mask_hull` is set.
[[nodiscard]] ScalarGrid posterior_surface(const PosteriorChains& chains, int n, const Vec2& lo, const Vec2& hi,
                                           int draw_stride = 10, bool mask_hull = true);

using SurfaceOracle = std::function<SurfaceDerivatives(const Vec2&)>;

enum class WombDirection { Normal, Tangent };

struct TrueWombling {
    std::vector<Vec2> segment_totals;  // (Gamma1, Gamma2) per segment
    Vec2 curve_total{Vec2::Zero()};
    Vec2 curve_average{Vec2::Zero()};
};

/// Deterministic line integrals of an analytic surface along the partition.
[[nodiscard]] TrueWombling true_wombling(const SurfaceOracle& oracle, const Partition& partition, int nodes = 32,
                                         WombDirection direction = WombDirection::Normal);

/// Deterministic Riemann sums using segment start points.
[[nodiscard]] TrueWombling riemann_true(const SurfaceOracle& oracle, const Partition& partition,
                                        WombDirection direction = WombDirection::Normal);

}  // namespace curvwomb
