#pragma once

// File formats shared by the command-line tool, the HTTP service and the
// Python module. Every writer emits doubles with 17 significant digits so
// that a write-then-read round trip is exact.

#include "curvwomb/curves.hpp"
#include "curvwomb/dataset.hpp"
#include "curvwomb/differential.hpp"
#include "curvwomb/mcmc.hpp"
#include "curvwomb/wombling.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace curvwomb::io {

// Dataset CSV: header `s1,s2,y[,x1..xp]`. The intercept column is added on
// read and dropped on write.
[[nodiscard]] SpatialDataset parse_dataset_csv(std::istream& in);
[[nodiscard]] SpatialDataset parse_dataset_csv(const std::string& text);
[[nodiscard]] SpatialDataset load_dataset(const std::string& path);
void write_dataset_csv(std::ostream& out, const SpatialDataset& data, const std::vector<std::string>& covariate_names = {});
[[nodiscard]] std::string dataset_csv(const SpatialDataset& data);

// Chain file:
//   # curvwomb-chains v1
//   # meta {"family":..., "priors":{...}, "seed":..., "iters":..., "burn_in":..., "thin":..., "locations":[[x,y],...]}
//   beta1,...,betap,sigma2,tau2,phi,Z1,...,ZL,accept
//   one row per retained draw
// Reading a file with no draws throws EmptySamples.
void write_chains(std::ostream& out, const PosteriorChains& chains);
[[nodiscard]] std::string chains_text(const PosteriorChains& chains);
[[nodiscard]] PosteriorChains parse_chains(std::istream& in);
[[nodiscard]] PosteriorChains parse_chains(const std::string& text);
void save_chains(const std::string& path, const PosteriorChains& chains);
[[nodiscard]] PosteriorChains load_chains(const std::string& path);

// Curve document (JSON):
//   {"kind": "polyline"|"bezier"|"level", "points": [[x,y],...], "closed": bool,
//    "level": number, "resolution": int, "select": [x,y], "orientation": "as_given"|"clockwise"|"counterclockwise"}
// Only `kind` is required; `points` is required unless kind is "level".
[[nodiscard]] Curve parse_curve(const std::string& text);
[[nodiscard]] Curve load_curve(const std::string& path);
[[nodiscard]] std::string curve_json(const Curve& curve);

// GridSummary CSV: x,y,field,median,lower,upper,flag (flag is none/positive/negative).
void write_grid_summary_csv(std::ostream& out, const GridSummary& summary, const std::vector<GridField>& fields = {});
[[nodiscard]] std::string grid_summary_csv(const GridSummary& summary, const std::vector<GridField>& fields = {});
[[nodiscard]] GridSummary parse_grid_summary_csv(const std::string& text);

// Wombling result: a segment table (CSV) and a JSON document with the
// segment table, the curve-level summary and the run metadata.
[[nodiscard]] std::string womble_segments_csv(const WomblingResult& result);
[[nodiscard]] std::string womble_json(const WomblingResult& result);

struct GridSpec {
    bool convex_hull{false};  // keep only lattice points inside the hull of the data
    std::optional<Vec2> lo;   // defaults to the bounding box of the locations
    std::optional<Vec2> hi;
    int resolution{19};
};

/// Lattice points described by `spec` for a given set of locations.
[[nodiscard]] Mat grid_points(const GridSpec& spec, const Mat& locations);

struct PriorOverrides {
    std::optional<double> a_phi, b_phi, a_sigma, b_sigma, a_tau, b_tau;
    bool applications{false};
};

/// The run configuration document (JSON). Every key is optional:
///   {"kernel": {"family": "matern52", "nu": 2.5},
///    "priors": {"a_phi":..., "b_phi":..., "a_sigma":..., "b_sigma":..., "a_tau":..., "b_tau":..., "applications": false},
///    "mcmc": {"iters": 10000, "burn_in": 5000, "thin": 1, "seed": 1, "target_accept": 0.44},
///    "grid": {"convex_hull": false, "lo": [x,y], "hi": [x,y], "resolution": 19},
///    "quadrature": {"n_1d": 10, "n_2d": 100},
///    "wombling": {"max_norm": 0.02, "mode": "joint", "surface_resolution": 51},
///    "draw_stride": 1, "alpha": 0.05, "curves": ["a.json", ...],
///    "service": {"host": "127.0.0.1", "port": 8080, "data_dir": "curvwomb-data", "max_concurrent_fits": 1}}
/// `nu` (1.5 or 2.5) selects the Matern family when given. Unknown keys are
/// rejected.
struct RunConfig {
    KernelFamily family{KernelFamily::Matern52};
    PriorOverrides priors;
    McmcSettings mcmc;
    GridSpec grid;
    int n_quad_1d{10};
    int n_quad_2d{100};
    double max_norm{0.02};
    WombMode mode{WombMode::Joint};
    int surface_resolution{51};
    int draw_stride{1};
    double alpha{0.05};
    std::vector<std::string> curves;
    std::string host{"127.0.0.1"};
    int port{8080};
    std::string data_dir{"curvwomb-data"};
    int max_concurrent_fits{1};

    /// Throws ConfigError.
    void validate() const;
    [[nodiscard]] PriorConfig prior_config(const SpatialDataset& data) const;
    [[nodiscard]] DifferentialSettings differential_settings() const;
    [[nodiscard]] WomblingSettings wombling_settings() const;
};

[[nodiscard]] RunConfig parse_run_config(const std::string& text);
[[nodiscard]] RunConfig load_run_config(const std::string& path);
[[nodiscard]] std::string run_config_json(const RunConfig& config);

[[nodiscard]] std::string read_file(const std::string& path);
/// Writes via a temporary file and a rename, so readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace curvwomb::io
