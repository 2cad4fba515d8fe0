#include "curvwomb/service.hpp"

#include "curvwomb/pipeline.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <semaphore>
#include <thread>
#include <vector>

namespace curvwomb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

struct Job {
    std::string id;
    std::string kind;  // fit | womble
    std::string status{"queued"};
    std::string error;
    std::string dataset_id;
    std::string fit_job_id;
    io::RunConfig config;
    std::shared_ptr<const PosteriorChains> chains;
    std::string result;  // wombling document
    std::shared_ptr<const GridSummary> grid;
    std::mutex grid_mu;
};

void send_error(httplib::Response& res, const HttpError& e) {
    res.status = e.status;
    res.set_content(json{{"error", {{"code", e.code}, {"message", e.message}}}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(2), "application/json");
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw HttpError{400, "ParseError", std::string("request body is not valid JSON: ") + e.what()};
    }
}

int id_number(const std::string& id) {
    try {
        return std::stoi(id.substr(1));
    } catch (...) {
        return 0;
    }
}

}  // namespace

struct Service::Impl {
    ServiceOptions options;
    httplib::Server server;

    std::mutex mu;
    std::condition_variable idle_cv;
    int active{0};
    int next_dataset{1};
    int next_job{1};
    std::map<std::string, std::shared_ptr<const SpatialDataset>> datasets;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::vector<std::thread> workers;
    std::counting_semaphore<1024> fit_slots;
    std::atomic<bool> shutting_down{false};

    explicit Impl(ServiceOptions o)
        : options(std::move(o)), fit_slots(std::clamp(options.max_concurrent_fits, 1, 1024)) {
        recover();
        routes();
    }

    ~Impl() {
        shutting_down = true;
        server.stop();
        for (std::thread& t : workers)
            if (t.joinable()) t.join();
    }

    fs::path dataset_path(const std::string& id) const { return fs::path(options.data_dir) / "datasets" / (id + ".csv"); }
    fs::path job_dir(const std::string& id) const { return fs::path(options.data_dir) / "jobs" / id; }

    json record(const Job& j) const {
        json r = {{"id", j.id}, {"kind", j.kind}, {"status", j.status}, {"error", j.error}};
        if (j.kind == "fit") {
            r["dataset_id"] = j.dataset_id;
            r["result"] = j.status == "done" ? json{{"chains", (job_dir(j.id) / "chains.txt").string()},
                                                    {"n_draws", j.chains ? j.chains->n_draws() : 0}}
                                             : json(nullptr);
        } else {
            r["fit_job_id"] = j.fit_job_id;
            r["result"] = j.status == "done" ? json::parse(j.result) : json(nullptr);
        }
        return r;
    }

    void persist(const Job& j) const {
        json r = {{"id", j.id},
                  {"kind", j.kind},
                  {"status", j.status},
                  {"error", j.error},
                  {"dataset_id", j.dataset_id},
                  {"fit_job_id", j.fit_job_id},
                  {"config", json::parse(io::run_config_json(j.config))}};
        io::write_file_atomic((job_dir(j.id) / "record.json").string(), r.dump(2));
    }

    void recover() {
        const fs::path ddir = fs::path(options.data_dir) / "datasets";
        if (fs::exists(ddir)) {
            for (const auto& e : fs::directory_iterator(ddir)) {
                if (e.path().extension() != ".csv") continue;
                const std::string id = e.path().stem().string();
                try {
                    datasets[id] = std::make_shared<SpatialDataset>(io::load_dataset(e.path().string()));
                    next_dataset = std::max(next_dataset, id_number(id) + 1);
                } catch (const Error&) {
                }
            }
        }
        const fs::path jdir = fs::path(options.data_dir) / "jobs";
        if (!fs::exists(jdir)) return;
        for (const auto& e : fs::directory_iterator(jdir)) {
            const fs::path rec = e.path() / "record.json";
            if (!fs::exists(rec)) continue;
            try {
                const json r = json::parse(io::read_file(rec.string()));
                auto j = std::make_shared<Job>();
                j->id = r.at("id").get<std::string>();
                j->kind = r.at("kind").get<std::string>();
                j->status = r.at("status").get<std::string>();
                j->error = r.at("error").get<std::string>();
                j->dataset_id = r.value("dataset_id", "");
                j->fit_job_id = r.value("fit_job_id", "");
                j->config = io::parse_run_config(r.at("config").dump());
                if (j->status == "done" && j->kind == "fit") {
                    j->chains = std::make_shared<PosteriorChains>(io::load_chains((e.path() / "chains.txt").string()));
                } else if (j->status == "done") {
                    j->result = io::read_file((e.path() / "result.json").string());
                } else if (j->status != "failed") {
                    j->status = "failed";
                    j->error = "interrupted by a service restart";
                    persist(*j);
                }
                next_job = std::max(next_job, id_number(j->id) + 1);
                jobs[j->id] = j;
            } catch (const std::exception&) {
            }
        }
    }

    std::shared_ptr<Job> find_job(const std::string& id) {
        std::lock_guard lock(mu);
        const auto it = jobs.find(id);
        if (it == jobs.end()) throw HttpError{404, "NotFound", "unknown job '" + id + "'"};
        return it->second;
    }

    std::shared_ptr<Job> finished_fit(const std::string& id) {
        const std::shared_ptr<Job> j = find_job(id);
        std::lock_guard lock(mu);
        if (j->kind != "fit") throw HttpError{400, "ConfigError", "job '" + id + "' is not a fit"};
        if (j->status == "failed") throw HttpError{409, "FitFailed", "fit '" + id + "' failed: " + j->error};
        if (j->status != "done") throw HttpError{409, "FitNotFinished", "fit '" + id + "' is " + j->status};
        return j;
    }

    void set_status(Job& j, const std::string& status, const std::string& error = {}) {
        {
            std::lock_guard lock(mu);
            j.status = status;
            j.error = error;
        }
        persist(j);
    }

    template <class Fn>
    void launch(std::shared_ptr<Job> job, bool limited, Fn work) {
        std::lock_guard lock(mu);
        ++active;
        workers.emplace_back([this, job, limited, work = std::move(work)]() mutable {
            if (limited) fit_slots.acquire();
            set_status(*job, "running");
            try {
                work(*job);
                set_status(*job, "done");
            } catch (const std::exception& e) {
                set_status(*job, "failed", e.what());
            }
            if (limited) fit_slots.release();
            std::lock_guard inner(mu);
            --active;
            idle_cv.notify_all();
        });
    }

    io::RunConfig config_from(const json& body, const char* key, const io::RunConfig& fallback) {
        if (!body.contains(key) || body[key].is_null()) return fallback;
        if (!body[key].is_object()) throw HttpError{400, "ConfigError", std::string("'") + key + "' must be an object"};
        json merged = json::parse(io::run_config_json(fallback));
        merged.merge_patch(body[key]);
        io::RunConfig c = io::parse_run_config(merged.dump());
        c.curves.clear();
        c.validate();
        return c;
    }

    template <class Fn>
    auto guarded(Fn fn) {
        return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const HttpError& e) {
                send_error(res, e);
            } catch (const Error& e) {
                send_error(res, {400, e.code(), e.what()});
            } catch (const std::exception& e) {
                send_error(res, {500, "InternalError", e.what()});
            }
        };
    }

    void routes() {
        server.Get("/v1/health", guarded([](const httplib::Request&, httplib::Response& res) {
                       send_json(res, {{"status", "ok"}});
                   }));

        server.Post("/v1/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        auto data = std::make_shared<SpatialDataset>(io::parse_dataset_csv(req.body));
                        std::string id;
                        {
                            std::lock_guard lock(mu);
                            id = "d" + std::to_string(next_dataset++);
                        }
                        io::write_file_atomic(dataset_path(id).string(), io::dataset_csv(*data));
                        {
                            std::lock_guard lock(mu);
                            datasets[id] = data;
                        }
                        send_json(res, {{"dataset_id", id}, {"L", data->size()}, {"p", data->n_covariates()}}, 201);
                    }));

        server.Post("/v1/fit", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const json body = parse_body(req);
                        if (!body.is_object() || !body.contains("dataset_id") || !body["dataset_id"].is_string())
                            throw HttpError{400, "ConfigError", "body needs a string 'dataset_id'"};
                        const std::string did = body["dataset_id"].get<std::string>();
                        std::shared_ptr<const SpatialDataset> data;
                        {
                            std::lock_guard lock(mu);
                            const auto it = datasets.find(did);
                            if (it == datasets.end()) throw HttpError{404, "NotFound", "unknown dataset '" + did + "'"};
                            data = it->second;
                        }
                        auto job = std::make_shared<Job>();
                        job->kind = "fit";
                        job->dataset_id = did;
                        job->config = config_from(body, "config", options.defaults);
                        (void)job->config.prior_config(*data);
                        {
                            std::lock_guard lock(mu);
                            job->id = "j" + std::to_string(next_job++);
                            jobs[job->id] = job;
                        }
                        persist(*job);
                        launch(job, true, [this, data](Job& j) {
                            io::RunConfig cfg = j.config;
                            cfg.mcmc.cancel = &shutting_down;
                            auto chains = std::make_shared<PosteriorChains>(run_fit(*data, cfg));
                            io::save_chains((job_dir(j.id) / "chains.txt").string(), *chains);
                            std::lock_guard lock(mu);
                            j.chains = std::move(chains);
                        });
                        send_json(res, {{"job_id", job->id}}, 202);
                    }));

        server.Get(R"(/v1/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const std::shared_ptr<Job> j = find_job(req.matches[1]);
                       json r;
                       {
                           std::lock_guard lock(mu);
                           r = record(*j);
                       }
                       send_json(res, r);
                   }));

        server.Get("/v1/grid-summary", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       if (!req.has_param("job")) throw HttpError{400, "ConfigError", "query parameter 'job' is required"};
                       const std::shared_ptr<Job> j = finished_fit(req.get_param_value("job"));
                       std::vector<GridField> fields;
                       if (req.has_param("field")) {
                           std::string list = req.get_param_value("field");
                           std::size_t start = 0;
                           while (start <= list.size()) {
                               const std::size_t pos = list.find(',', start);
                               const std::string name = list.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
                               if (!name.empty()) fields.push_back(grid_field_from_string(name));
                               if (pos == std::string::npos) break;
                               start = pos + 1;
                           }
                       }
                       std::shared_ptr<const GridSummary> grid;
                       {
                           std::lock_guard lock(j->grid_mu);
                           if (!j->grid) j->grid = std::make_shared<GridSummary>(run_differentials(*j->chains, j->config));
                           grid = j->grid;
                       }
                       res.set_content(io::grid_summary_csv(*grid, fields), "text/csv");
                   }));

        server.Post("/v1/womble", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const json body = parse_body(req);
                        if (!body.is_object() || !body.contains("fit_job_id") || !body["fit_job_id"].is_string())
                            throw HttpError{400, "ConfigError", "body needs a string 'fit_job_id'"};
                        if (!body.contains("curve")) throw HttpError{400, "ConfigError", "body needs a 'curve' document"};
                        const std::shared_ptr<Job> fitj = finished_fit(body["fit_job_id"].get<std::string>());
                        const io::RunConfig config = config_from(body, "settings", fitj->config);
                        const Curve curve = io::parse_curve(body["curve"].dump());
                        const auto chains = fitj->chains;
                        const Partition part = realize_curve(*chains, curve, config);
                        if (part.segments.size() <= options.sync_segment_limit) {
                            const WomblingResult r = sample_wombling(*chains, part, config.wombling_settings());
                            res.set_content(io::womble_json(r), "application/json");
                            return;
                        }
                        auto job = std::make_shared<Job>();
                        job->kind = "womble";
                        job->fit_job_id = fitj->id;
                        job->config = config;
                        {
                            std::lock_guard lock(mu);
                            job->id = "j" + std::to_string(next_job++);
                            jobs[job->id] = job;
                        }
                        persist(*job);
                        launch(job, false, [this, chains, part](Job& j) {
                            const std::string doc = io::womble_json(sample_wombling(*chains, part, j.config.wombling_settings()));
                            io::write_file_atomic((job_dir(j.id) / "result.json").string(), doc);
                            std::lock_guard lock(mu);
                            j.result = doc;
                        });
                        send_json(res, {{"job_id", job->id}}, 202);
                    }));
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() = default;

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int Service::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }
void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }
void Service::stop() { impl_->server.stop(); }

void Service::wait_idle() {
    std::unique_lock lock(impl_->mu);
    impl_->idle_cv.wait(lock, [this] { return impl_->active == 0; });
}

}  // namespace curvwomb
