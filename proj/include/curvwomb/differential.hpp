#pragma once

// Conditional inference for the differential process (Y, grad Y, vech Hess Y)
// at arbitrary points given values of the field at observed locations.

#include "curvwomb/kernels.hpp"
#include "curvwomb/linalg.hpp"
#include "curvwomb/mcmc.hpp"
#include "curvwomb/summary.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace curvwomb {

/// Gaussian law of (grad, vech Hess) at one point.
struct DifferentialLaw {
    Vec5 mean{Vec5::Zero()};
    Mat5 cov{Mat5::Zero()};
};

/// Same law with the field value prepended (index 0).
struct FullDifferentialLaw {
    Vec6 mean{Vec6::Zero()};
    Mat6 cov{Mat6::Zero()};

    [[nodiscard]] DifferentialLaw differential() const {
        return {mean.tail<5>(), cov.bottomRightCorner<5, 5>()};
    }
};

/// Derivatives of the mean surface at the target point.
struct MeanDerivatives {
    double value{0.0};
    Vec2 grad{Vec2::Zero()};
    Vec3 hess{Vec3::Zero()};
};

struct DifferentialDraw {
    Vec2 location{Vec2::Zero()};
    double value{0.0};
    Vec2 grad{Vec2::Zero()};
    Vec3 hess_vech{Vec3::Zero()};
};

/// Factorizes the field covariance once so that many target points can be
/// conditioned cheaply.
class FieldConditioner {
public:
    /// `nugget` is added to the diagonal of the field covariance; 0 for the
    /// latent surface.
    FieldConditioner(const KernelSpec& spec, const Mat& locations, const Vec& field_values, const Vec& field_mean,
                     double nugget = 0.0);

    [[nodiscard]] FullDifferentialLaw law(const Vec2& s0, const MeanDerivatives& mean = {}) const;
    [[nodiscard]] const KernelSpec& spec() const { return spec_; }

private:
    KernelSpec spec_;
    Mat locations_;
    Cholesky chol_;
    Vec alpha_;
    Mat6 v0_;
};

[[nodiscard]] DifferentialLaw conditional_differential(const KernelSpec& spec, const Mat& locations, const Vec& field_values,
                                                       const Vec& field_mean, const MeanDerivatives& mean_derivs,
                                                       const Vec2& s0);

[[nodiscard]] double divergence(const DifferentialDraw& d);
[[nodiscard]] double laplacian(const DifferentialDraw& d);
/// Aspect angle atan2(d2, d1). Convenience only.
[[nodiscard]] double aspect(const DifferentialDraw& d);

struct CurvatureSummary {
    double eigen1{0};
    double eigen2{0};
    double gaussian{0};
    double theta_pc{0};  // in [0, pi)
};

[[nodiscard]] CurvatureSummary curvature_summary(const Vec3& hess_vech);
[[nodiscard]] inline CurvatureSummary curvature_summary(const DifferentialDraw& d) { return curvature_summary(d.hess_vech); }

enum class GridField { Z, D1, D2, D11, D12, D22, Divergence, Laplacian, Eigen1, Eigen2, Gaussian, ThetaPC, Aspect };
inline constexpr std::array<GridField, 13> kAllGridFields{GridField::Z,          GridField::D1,        GridField::D2,
                                                          GridField::D11,        GridField::D12,       GridField::D22,
                                                          GridField::Divergence, GridField::Laplacian, GridField::Eigen1,
                                                          GridField::Eigen2,     GridField::Gaussian,  GridField::ThetaPC,
                                                          GridField::Aspect};

[[nodiscard]] std::string_view to_string(GridField f);
[[nodiscard]] GridField grid_field_from_string(std::string_view name);
[[nodiscard]] double field_value(GridField f, const DifferentialDraw& d);

struct DifferentialSettings {
    double alpha{0.05};
    std::uint64_t seed{1};
    int draw_stride{1};  // use every k-th retained draw
};

/// Posterior draws at the given points: result[draw][point].
[[nodiscard]] std::vector<std::vector<DifferentialDraw>> draw_differentials(const PosteriorChains& chains, const Mat& points,
                                                                            const DifferentialSettings& settings);

/// Median over draws of E[Z(s) | Z, theta] at each point (kriging of the
/// latent field), for contouring the fitted surface.
[[nodiscard]] Vec latent_mean_surface(const PosteriorChains& chains, const Mat& points, int draw_stride = 1);

struct GridSummary {
    Mat points;                               // n x 2
    std::vector<GridField> fields;
    std::vector<std::vector<Summary>> stats;  // [field][point]
    double prob{0.95};

    [[nodiscard]] const std::vector<Summary>& field(GridField f) const;
};

[[nodiscard]] GridSummary summarize_draws(const std::vector<std::vector<DifferentialDraw>>& draws, const Mat& points,
                                          double alpha);

[[nodiscard]] GridSummary sample_differentials(const PosteriorChains& chains, const Mat& grid,
                                               const DifferentialSettings& settings);

}  // namespace curvwomb
