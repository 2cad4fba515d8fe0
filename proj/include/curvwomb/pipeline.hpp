#pragma once

// End-to-end operations driven by a RunConfig. The CLI, the HTTP service and
// the Python module all go through these so that identical inputs and seeds
// give bit-identical outputs.

#include "curvwomb/io.hpp"

namespace curvwomb {

[[nodiscard]] PosteriorChains run_fit(const SpatialDataset& data, const io::RunConfig& config);

[[nodiscard]] GridSummary run_differentials(const PosteriorChains& chains, const io::RunConfig& config);

/// Turns a curve document into a partition. Level curves are traced on the
/// fitted surface over the bounding box of the locations, masked to their
/// convex hull.
[[nodiscard]] Partition realize_curve(const PosteriorChains& chains, const Curve& curve, const io::RunConfig& config);

[[nodiscard]] WomblingResult run_womble(const PosteriorChains& chains, const Curve& curve, const io::RunConfig& config);

}  // namespace curvwomb
