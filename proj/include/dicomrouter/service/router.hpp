#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicomrouter/nn/backend.hpp"
#include "dicomrouter/service/audit_log.hpp"
#include "dicomrouter/service/config.hpp"
#include "dicomrouter/service/review_queue.hpp"

namespace dicomrouter::service {

/// Payload could not be turned into a model input.
class ParseFailure : public std::runtime_error {
public:
    ParseFailure(const std::string& what, bool not_dicom)
        : std::runtime_error(what), not_dicom_(not_dicom) {}
    /// True for a missing DICM prefix or an unsupported encoding (HTTP 415).
    bool not_dicom() const { return not_dicom_; }

private:
    bool not_dicom_;
};

class BackendUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DestinationUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RoutingDecision {
    std::string id;
    std::string sha256;
    std::optional<nn::BodyPartClass> cls;
    std::optional<nn::Probabilities> probs;
    double latency_s = 0.0;
    std::string ts;
    std::string destination;
    RouteStatus status = RouteStatus::Failed;
    std::string detail;  // error text for failures
    bool parse_error = false;
    bool not_dicom = false;

    AuditRecord audit_record() const;
};

struct ClassifyResult {
    std::string id;
    nn::Prediction prediction;
};

/// SHA-256 as lowercase hex.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// POSTs a payload; returns the HTTP status, or throws on transport errors.
using HttpPoster = std::function<int(const std::string& url, const std::string& body,
                                     const std::map<std::string, std::string>& headers,
                                     double timeout_s)>;

HttpPoster default_http_poster();

class Router {
public:
    /// `backend` may be null; classification then throws BackendUnavailable.
    Router(RouteConfig config, std::shared_ptr<const nn::Backend> backend);

    const RouteConfig& config() const { return config_; }

    /// Side-effect free: parse, preprocess, predict. Throws ParseFailure,
    /// BackendUnavailable, nn::BackendFailure.
    ClassifyResult classify(std::span<const std::uint8_t> bytes) const;

    /// Full pipeline for an in-memory payload. Exactly one audit record is
    /// appended per call. `name_hint` names the stored file when the item
    /// has no SOP Instance UID. Throws BackendUnavailable before any side
    /// effect when no backend is loaded, and DiskFull when the audit record
    /// could not be written (the router then stays degraded).
    RoutingDecision ingest(std::span<const std::uint8_t> bytes, const std::string& name_hint = "");

    /// Reads, ingests, and removes `path` (its content now lives in exactly
    /// one terminal location).
    RoutingDecision ingest_file(const fs::path& path);

    bool has_backend() const { return backend_ != nullptr; }
    bool degraded() const;

    ReviewQueue& review() { return review_; }
    const ReviewQueue& review() const { return review_; }

    /// Stored file for an item id, if this router placed it somewhere local.
    std::optional<fs::path> stored_file(const std::string& id) const;

    /// Replaces the HTTP transport (tests, custom clients).
    void set_http_poster(HttpPoster poster) { poster_ = std::move(poster); }

    /// Sleep function used between retries (tests shorten it).
    void set_sleeper(std::function<void(double seconds)> sleeper) { sleeper_ = std::move(sleeper); }

private:
    RoutingDecision process(std::span<const std::uint8_t> bytes, const std::string& hash,
                            const std::string& name_hint);
    std::string store_atomically(std::span<const std::uint8_t> bytes, const fs::path& dir,
                                 const std::string& stem, const std::string& hash);
    void forward_http(const std::string& url, std::span<const std::uint8_t> bytes,
                      const RoutingDecision& d);
    void remember(const std::string& id, const fs::path& p);

    RouteConfig config_;
    std::shared_ptr<const nn::Backend> backend_;
    AuditLog audit_;
    ReviewQueue review_;
    HttpPoster poster_;
    std::function<void(double)> sleeper_;

    mutable std::mutex state_mutex_;
    std::condition_variable in_flight_cv_;
    std::set<std::string> in_flight_;
    std::set<std::string> seen_hashes_;
    std::map<std::string, fs::path> stored_;
    bool degraded_ = false;

    std::mutex naming_mutex_;
};

}  // namespace dicomrouter::service
