#pragma once

// Local HTTP API under /v1:
//   GET  /v1/health
//   POST /v1/datasets          body: dataset CSV                      -> {"dataset_id"}
//   POST /v1/fit               body: {"dataset_id", "config"}         -> 202 {"job_id"}
//   GET  /v1/jobs/{id}                                                -> job record
//   GET  /v1/grid-summary?job=ID[&field=a,b]                          -> GridSummary CSV
//   POST /v1/womble            body: {"fit_job_id", "curve", "settings"} -> wombling document,
//                              or 202 {"job_id"} when the partition exceeds 200 segments
// Errors are {"error": {"code", "message"}} with 400 (bad input), 404
// (unknown id) or 409 (fit not finished).

#include "curvwomb/io.hpp"

#include <memory>
#include <string>

namespace curvwomb {

struct ServiceOptions {
    io::RunConfig defaults;  // used when a request carries no config
    std::string data_dir{"curvwomb-data"};
    int max_concurrent_fits{1};
    std::size_t sync_segment_limit{200};
};

class Service {
public:
    /// Recovers datasets and finished jobs persisted under data_dir.
    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Blocking.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();
    /// Blocks until no fit or wombling job is queued or running.
    void wait_idle();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace curvwomb
