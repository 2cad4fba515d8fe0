#include "curvwomb/pipeline.hpp"
#include "curvwomb/simulate.hpp"
#include "curvwomb/summary.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace curvwomb;

namespace {

io::RunConfig config_or_default(const std::string& json) {
    io::RunConfig c = json.empty() ? io::RunConfig{} : io::parse_run_config(json);
    c.validate();
    return c;
}

SpatialDataset make_dataset(const Mat& locations, const Vec& y, const std::optional<Mat>& X) {
    SpatialDataset d;
    d.locations = locations;
    d.y = y;
    d.X = X ? *X : Mat::Ones(y.size(), 1);
    d.validate();
    return d;
}

py::dict grid_dict(const GridSummary& g) {
    py::dict out;
    out["points"] = g.points;
    for (std::size_t f = 0; f < g.fields.size(); ++f) {
        const auto& st = g.stats[f];
        Mat m(static_cast<Eigen::Index>(st.size()), 3);
        std::vector<std::string> flags;
        for (std::size_t i = 0; i < st.size(); ++i) {
            m.row(static_cast<Eigen::Index>(i)) << st[i].median, st[i].lower, st[i].upper;
            flags.emplace_back(to_string(st[i].flag));
        }
        py::dict field;
        field["median"] = Vec(m.col(0));
        field["lower"] = Vec(m.col(1));
        field["upper"] = Vec(m.col(2));
        field["flag"] = flags;
        out[py::str(std::string(to_string(g.fields[f])))] = field;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gaussian-process gradients, curvatures and curvilinear wombling";

    py::register_exception<Error>(m, "CurvwombError", PyExc_ValueError);

    py::class_<PosteriorChains>(m, "Chains")
        .def_property_readonly("family", [](const PosteriorChains& c) { return std::string(to_string(c.family)); })
        .def_readonly("locations", &PosteriorChains::locations)
        .def_readonly("beta", &PosteriorChains::beta)
        .def_readonly("sigma2", &PosteriorChains::sigma2)
        .def_readonly("tau2", &PosteriorChains::tau2)
        .def_readonly("phi", &PosteriorChains::phi)
        .def_readonly("Z", &PosteriorChains::Z)
        .def_readonly("accept_rate", &PosteriorChains::accept_rate)
        .def_readonly("seed", &PosteriorChains::seed)
        .def_property_readonly("n_draws", &PosteriorChains::n_draws)
        .def("save", [](const PosteriorChains& c, const std::string& path) { io::save_chains(path, c); })
        .def("to_text", [](const PosteriorChains& c) { return io::chains_text(c); });

    m.def("load_chains", &io::load_chains, py::arg("path"));
    m.def("parse_chains", py::overload_cast<const std::string&>(&io::parse_chains), py::arg("text"));

    m.def(
        "simulate",
        [](int pattern, int L, std::uint64_t seed, double tau2) {
            const SpatialDataset d = generate(PatternOracle(pattern, tau2), L, seed);
            return py::make_tuple(d.locations, d.y);
        },
        py::arg("pattern") = 1, py::arg("L") = 100, py::arg("seed") = 1, py::arg("tau2") = 1.0,
        "Synthetic dataset; returns (locations, y).");

    m.def(
        "pattern_mean",
        [](int pattern, double x, double y) {
            const SurfaceDerivatives d = PatternOracle(pattern, 0.0).derivatives(Vec2(x, y));
            py::dict out;
            out["value"] = d.value;
            out["grad"] = d.grad;
            out["hess"] = d.hess;
            return out;
        },
        py::arg("pattern"), py::arg("x"), py::arg("y"));

    m.def(
        "fit",
        [](const Mat& locations, const Vec& y, const std::optional<Mat>& X, const std::string& config) {
            const SpatialDataset d = make_dataset(locations, y, X);
            const io::RunConfig c = config_or_default(config);
            py::gil_scoped_release release;
            return run_fit(d, c);
        },
        py::arg("locations"), py::arg("y"), py::arg("X") = py::none(), py::arg("config") = "");

    m.def(
        "fit_csv",
        [](const std::string& path, const std::string& config) {
            const SpatialDataset d = io::load_dataset(path);
            const io::RunConfig c = config_or_default(config);
            py::gil_scoped_release release;
            return run_fit(d, c);
        },
        py::arg("path"), py::arg("config") = "");

    m.def(
        "differentials",
        [](const PosteriorChains& chains, const std::string& config) {
            const io::RunConfig c = config_or_default(config);
            GridSummary g;
            {
                py::gil_scoped_release release;
                g = run_differentials(chains, c);
            }
            return grid_dict(g);
        },
        py::arg("chains"), py::arg("config") = "");

    m.def(
        "differentials_csv",
        [](const PosteriorChains& chains, const std::string& config) {
            return io::grid_summary_csv(run_differentials(chains, config_or_default(config)));
        },
        py::arg("chains"), py::arg("config") = "");

    m.def(
        "womble_json",
        [](const PosteriorChains& chains, const std::string& curve, const std::string& config) {
            const io::RunConfig c = config_or_default(config);
            const Curve cv = io::parse_curve(curve);
            py::gil_scoped_release release;
            return io::womble_json(run_womble(chains, cv, c));
        },
        py::arg("chains"), py::arg("curve"), py::arg("config") = "",
        "Wombling document for a curve given as its JSON text.");

    m.def(
        "cross_cov_blocks",
        [](const std::string& family, double sigma2, double phi, double dx, double dy) {
            const CrossCovBlocks b = cross_cov_blocks({kernel_family_from_string(family), sigma2, phi}, Displacement(Vec2(dx, dy)));
            py::dict out;
            out["k"] = b.k;
            out["g"] = b.g;
            out["h"] = b.h;
            out["t3"] = b.t3;
            out["t4"] = b.t4;
            return out;
        },
        py::arg("family"), py::arg("sigma2"), py::arg("phi"), py::arg("dx"), py::arg("dy"));

    m.def(
        "hpd",
        [](const std::vector<double>& samples, double prob) {
            const HPDInterval h = hpd(samples, prob);
            return py::make_tuple(h.lower, h.upper);
        },
        py::arg("samples"), py::arg("prob") = 0.95);
}
