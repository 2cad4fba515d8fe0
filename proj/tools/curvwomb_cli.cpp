// curvwomb command-line tool: simulate | fit | differentials | womble | serve
//
// Failures print one line `error: <Code>: <message>` on stderr and exit with
// status 1 (2 for usage errors). Outputs are written only after the whole
// computation succeeded.

#include "curvwomb/pipeline.hpp"
#include "curvwomb/service.hpp"
#include "curvwomb/simulate.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

using namespace curvwomb;

namespace {

void emit(const std::string& path, const std::string& contents) {
    if (path.empty() || path == "-") {
        std::cout << contents;
        std::cout.flush();
    } else {
        io::write_file_atomic(path, contents);
    }
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

io::RunConfig load_config(const std::string& path) {
    io::RunConfig c = path.empty() ? io::RunConfig{} : io::load_run_config(path);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian curvilinear wombling on Gaussian-process surfaces"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "run configuration (JSON)")->check(CLI::ExistingFile);

    // simulate
    auto* sim = app.add_subcommand("simulate", "write a synthetic dataset CSV");
    int pattern = 1, L = 100;
    std::uint64_t seed = 1;
    double tau2 = 1.0;
    std::string out;
    sim->add_option("--pattern", pattern, "mean surface (1 or 2)")->check(CLI::IsMember({1, 2}));
    sim->add_option("--L", L, "number of locations")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "random seed");
    sim->add_option("--tau2", tau2, "noise variance")->check(CLI::NonNegativeNumber);
    sim->add_option("-o,--out", out, "output path (default stdout)");

    // fit
    auto* fitc = app.add_subcommand("fit", "run the MCMC sampler and write the chain file");
    std::string data_path, family;
    std::optional<int> iters, burn_in, thin;
    std::optional<std::uint64_t> fit_seed;
    fitc->add_option("--data", data_path, "dataset CSV")->required()->check(CLI::ExistingFile);
    fitc->add_option("--family", family, "kernel family (sqexp, matern32, matern52)");
    fitc->add_option("--iters", iters, "MCMC iterations");
    fitc->add_option("--burn-in", burn_in, "burn-in iterations");
    fitc->add_option("--thin", thin, "thinning interval");
    fitc->add_option("--seed", fit_seed, "random seed");
    fitc->add_option("-o,--out", out, "chain file path")->required();

    // differentials
    auto* diff = app.add_subcommand("differentials", "posterior summaries of the differential fields on a grid");
    std::string chains_path, fields;
    std::optional<int> resolution;
    diff->add_option("--chains", chains_path, "chain file")->required();
    diff->add_option("--fields", fields, "comma-separated subset of fields");
    diff->add_option("--resolution", resolution, "grid points per axis");
    diff->add_option("-o,--out", out, "GridSummary CSV path (default stdout)");

    // womble
    auto* womb = app.add_subcommand("womble", "wombling measures along a curve");
    std::string curve_path, json_out;
    std::optional<double> max_norm;
    womb->add_option("--chains", chains_path, "chain file")->required();
    womb->add_option("--curve", curve_path, "curve document (JSON)")->required()->check(CLI::ExistingFile);
    womb->add_option("--max-norm", max_norm, "maximum segment length");
    womb->add_option("-o,--out", out, "segment table CSV path (default stdout)");
    womb->add_option("--json", json_out, "also write the full JSON document here");

    // serve
    auto* serve = app.add_subcommand("serve", "start the HTTP service");
    std::optional<std::string> host, data_dir;
    std::optional<int> port;
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "bind port");
    serve->add_option("--data-dir", data_dir, "directory for datasets and chain files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: UsageError: %s\n", one_line(e.what()).c_str());
        return 2;
    }

    try {
        io::RunConfig cfg = load_config(config_path);
        if (const char* dir = std::getenv("CURVWOMB_OUTPUT_DIR"); dir && !out.empty() && out != "-" && out.front() != '/')
            out = std::string(dir) + "/" + out;

        if (*sim) {
            emit(out, io::dataset_csv(generate(PatternOracle(pattern, tau2), L, seed)));
        } else if (*fitc) {
            if (!family.empty()) cfg.family = kernel_family_from_string(family);
            if (iters) cfg.mcmc.iters = *iters;
            if (burn_in) cfg.mcmc.burn_in = *burn_in;
            if (thin) cfg.mcmc.thin = *thin;
            if (fit_seed) cfg.mcmc.seed = *fit_seed;
            cfg.validate();
            const SpatialDataset data = io::load_dataset(data_path);
            emit(out, io::chains_text(run_fit(data, cfg)));
        } else if (*diff) {
            if (resolution) cfg.grid.resolution = *resolution;
            cfg.validate();
            std::vector<GridField> subset;
            std::size_t start = 0;
            while (!fields.empty() && start <= fields.size()) {
                const std::size_t pos = fields.find(',', start);
                subset.push_back(grid_field_from_string(fields.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
                if (pos == std::string::npos) break;
                start = pos + 1;
            }
            const PosteriorChains chains = io::load_chains(chains_path);
            emit(out, io::grid_summary_csv(run_differentials(chains, cfg), subset));
        } else if (*womb) {
            if (max_norm) cfg.max_norm = *max_norm;
            cfg.validate();
            const PosteriorChains chains = io::load_chains(chains_path);
            const WomblingResult r = run_womble(chains, io::load_curve(curve_path), cfg);
            const std::string table = io::womble_segments_csv(r);
            if (!json_out.empty()) io::write_file_atomic(json_out, io::womble_json(r));
            emit(out, table);
        } else if (*serve) {
            ServiceOptions opts;
            opts.defaults = cfg;
            opts.data_dir = data_dir.value_or(cfg.data_dir);
            opts.max_concurrent_fits = cfg.max_concurrent_fits;
            Service service(opts);
            const std::string h = host.value_or(cfg.host);
            const int p = port.value_or(cfg.port);
            std::fprintf(stderr, "listening on http://%s:%d/v1\n", h.c_str(), p);
            if (!service.listen(h, p)) throw ConfigError("cannot bind " + h + ":" + std::to_string(p));
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", e.code().c_str(), one_line(e.what()).c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: InternalError: %s\n", one_line(e.what()).c_str());
        return 1;
    }
    return 0;
}
