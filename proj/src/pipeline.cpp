#include "curvwomb/pipeline.hpp"

namespace curvwomb {

PosteriorChains run_fit(const SpatialDataset& data, const io::RunConfig& config) {
    data.validate();
    return fit(data, config.family, config.prior_config(data), config.mcmc);
}

GridSummary run_differentials(const PosteriorChains& chains, const io::RunConfig& config) {
    chains.validate();
    return sample_differentials(chains, io::grid_points(config.grid, chains.locations), config.differential_settings());
}

Partition realize_curve(const PosteriorChains& chains, const Curve& curve, const io::RunConfig& config) {
    if (curve.kind != CurveKind::LevelSet) return realize(curve, config.max_norm);
    const Vec2 lo = chains.locations.colwise().minCoeff().transpose();
    const Vec2 hi = chains.locations.colwise().maxCoeff().transpose();
    const ScalarGrid surface = posterior_surface(chains, config.surface_resolution, lo, hi, 10);
    return realize(curve, config.max_norm, &surface);
}

WomblingResult run_womble(const PosteriorChains& chains, const Curve& curve, const io::RunConfig& config) {
    chains.validate();
    return sample_wombling(chains, realize_curve(chains, curve, config), config.wombling_settings());
}

}  // namespace curvwomb
