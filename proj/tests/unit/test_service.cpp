#include "doctest.h"

#include "curvwomb/pipeline.hpp"
#include "curvwomb/service.hpp"
#include "curvwomb/simulate.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <thread>

using namespace curvwomb;
using nlohmann::json;

namespace {

struct Running {
    Service service;
    int port;
    std::thread thread;

    explicit Running(ServiceOptions o) : service(std::move(o)), port(service.bind_any_port("127.0.0.1")) {
        thread = std::thread([this] { service.listen_after_bind(); });
        service.wait_until_ready();
    }
    ~Running() {
        service.stop();
        thread.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

ServiceOptions options(const std::string& name) {
    ServiceOptions o;
    o.data_dir = (std::filesystem::temp_directory_path() / ("curvwomb_service_" + name)).string();
    std::filesystem::remove_all(o.data_dir);
    return o;
}

std::string error_code(const httplib::Result& r) { return json::parse(r->body)["error"]["code"].get<std::string>(); }

const char* kSmallConfig = R"({"iters": 300, "burn_in": 100, "seed": 5})";

}  // namespace

TEST_CASE("service: health and input errors") {
    Running s(options("errors"));
    auto c = s.client();
    auto h = c.Get("/v1/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(json::parse(h->body)["status"] == "ok");

    auto bad = c.Post("/v1/datasets", "s1,s2,y\n0,0,x\n", "text/csv");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(error_code(bad) == "ParseError");

    auto nf = c.Post("/v1/fit", R"({"dataset_id": "d99"})", "application/json");
    CHECK(nf->status == 404);
    CHECK(c.Get("/v1/jobs/j42")->status == 404);
    CHECK(c.Get("/v1/grid-summary?job=j42")->status == 404);
    CHECK(c.Get("/v1/grid-summary")->status == 400);
    CHECK(c.Post("/v1/fit", "{", "application/json")->status == 400);
}

TEST_CASE("service: unfinished fits answer 409") {
    Running s(options("busy"));
    auto c = s.client();
    auto d = c.Post("/v1/datasets", io::dataset_csv(generate(PatternOracle(1, 1.0), 30, 1)), "text/csv");
    REQUIRE(d->status == 201);
    const std::string did = json::parse(d->body)["dataset_id"];
    auto f = c.Post("/v1/fit", json{{"dataset_id", did}, {"config", {{"mcmc", {{"iters", 5000000}, {"burn_in", 10}, {"thin", 1000}}}}}}.dump(),
                    "application/json");
    REQUIRE(f->status == 202);
    const std::string jid = json::parse(f->body)["job_id"];
    const json womble = {{"fit_job_id", jid}, {"curve", {{"kind", "polyline"}, {"points", {{0.2, 0.2}, {0.8, 0.8}}}}}};
    auto w = c.Post("/v1/womble", womble.dump(), "application/json");
    CHECK(w->status == 409);
    CHECK(error_code(w) == "FitNotFinished");
    CHECK(c.Get(("/v1/grid-summary?job=" + jid).c_str())->status == 409);
    const std::string st = json::parse(c.Get(("/v1/jobs/" + jid).c_str())->body)["status"];
    INFO(c.Get(("/v1/jobs/" + jid).c_str())->body);
    CHECK((st == "queued" || st == "running"));
    // Destruction cancels the fit.
}

TEST_CASE("service: fit, summaries, wombling and restart") {
    ServiceOptions o = options("flow");
    o.defaults.grid.resolution = 5;
    o.sync_segment_limit = 8;
    const SpatialDataset data = generate(PatternOracle(1, 1.0), 30, 2);
    const json cfg = {{"mcmc", json::parse(kSmallConfig)}, {"grid", {{"resolution", 5}}}};
    std::string jid;
    std::string womble_body;
    {
        Running s(o);
        auto c = s.client();
        auto d = c.Post("/v1/datasets", io::dataset_csv(data), "text/csv");
        REQUIRE(d->status == 201);
        CHECK(json::parse(d->body)["L"] == 30);
        const std::string did = json::parse(d->body)["dataset_id"];
        auto f = c.Post("/v1/fit", json{{"dataset_id", did}, {"config", cfg}}.dump(), "application/json");
        REQUIRE(f->status == 202);
        jid = json::parse(f->body)["job_id"].get<std::string>();
        s.service.wait_idle();
        const json rec = json::parse(c.Get(("/v1/jobs/" + jid).c_str())->body);
        REQUIRE(rec["status"] == "done");
        CHECK(rec["result"]["n_draws"] == 200);

        auto g = c.Get(("/v1/grid-summary?job=" + jid + "&field=d1,laplacian").c_str());
        REQUIRE(g->status == 200);
        const GridSummary gs = io::parse_grid_summary_csv(g->body);
        CHECK(gs.fields.size() == 2);
        CHECK(gs.points.rows() == 25);
        CHECK(c.Get(("/v1/grid-summary?job=" + jid + "&field=nonsense").c_str())->status == 400);

        const json curve = {{"kind", "polyline"}, {"points", {{0.2, 0.3}, {0.7, 0.6}}}};
        auto w = c.Post("/v1/womble", json{{"fit_job_id", jid}, {"curve", curve}, {"settings", {{"wombling", {{"max_norm", 0.1}}}}}}.dump(),
                        "application/json");
        REQUIRE(w->status == 200);
        womble_body = w->body;

        // Same computation through the library entry points.
        io::RunConfig rc = io::parse_run_config(cfg.dump());
        rc.max_norm = 0.1;
        const PosteriorChains chains = run_fit(io::parse_dataset_csv(io::dataset_csv(data)), rc);
        CHECK(io::womble_json(run_womble(chains, io::parse_curve(curve.dump()), rc)) == womble_body);

        // Over the synchronous limit the request becomes a job.
        auto big = c.Post("/v1/womble",
                          json{{"fit_job_id", jid}, {"curve", curve}, {"settings", {{"wombling", {{"max_norm", 0.05}}}}}}.dump(),
                          "application/json");
        REQUIRE(big->status == 202);
        const std::string wid = json::parse(big->body)["job_id"];
        s.service.wait_idle();
        const json wrec = json::parse(c.Get(("/v1/jobs/" + wid).c_str())->body);
        CHECK(wrec["status"] == "done");
        CHECK(wrec["result"]["segments"].size() > 8);
    }
    {
        Running s(o);
        auto c = s.client();
        const json rec = json::parse(c.Get(("/v1/jobs/" + jid).c_str())->body);
        CHECK(rec["status"] == "done");
        const json curve = {{"kind", "polyline"}, {"points", {{0.2, 0.3}, {0.7, 0.6}}}};
        auto w = c.Post("/v1/womble", json{{"fit_job_id", jid}, {"curve", curve}, {"settings", {{"wombling", {{"max_norm", 0.1}}}}}}.dump(),
                        "application/json");
        REQUIRE(w->status == 200);
        CHECK(w->body == womble_body);
        auto d2 = c.Post("/v1/datasets", "s1,s2,y\n0,0,1\n1,0,2\n0,1,3\n", "text/csv");
        CHECK(json::parse(d2->body)["dataset_id"] == "d2");
    }
}
