#pragma once

// HTTP API:
//
//   GET  /healthz                 200 "ok"
//   POST /v1/classify             DICOM body -> {id, class, class_code, probs, latency_s}
//   POST /v1/ingest               DICOM body -> routing decision
//   GET  /v1/review/queue         open review items (?all=1 includes closed)
//   POST /v1/review/{id}/label    {"reader", "round": 1|2|"adjudication", "class"}
//   GET  /v1/images/{id}.png      8-bit rendition through the pixel pipeline
//   GET  /v1/audit?since=<ts>     audit records with ts > since
//
// When an API token is configured every route except /healthz requires a
// matching X-Api-Token header.

#include <memory>
#include <string>

#include "dicomrouter/service/router.hpp"

namespace httplib {
class Server;
}

namespace dicomrouter::service {

class Server {
public:
    explicit Server(Router& router);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and serves until stop(); blocks. Returns false if binding fails.
    bool listen(const std::string& host, int port);

    /// Binds to an ephemeral port and returns it (-1 on failure); then call
    /// listen_after_bind() (typically on another thread).
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();

    void stop();
    bool is_running() const;
    void wait_until_ready() const;

private:
    void install_routes();

    Router& router_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace dicomrouter::service
