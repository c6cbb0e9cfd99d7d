#pragma once

// Append-only JSONL audit trail, one object per ingest:
//
//   {"ts":"2026-01-02T03:04:05.678Z","id":"...","class":"spine",
//    "probs":[...5],"latency_s":0.01,"destination":"...","status":"routed"}
//
// class and probs are null when classification did not happen.

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicomrouter/nn/body_part.hpp"

namespace dicomrouter::service {

namespace fs = std::filesystem;

enum class RouteStatus { Routed, QueuedForReview, Failed, Duplicate };

std::string_view to_string(RouteStatus s);
std::optional<RouteStatus> parse_route_status(std::string_view s);

struct AuditRecord {
    std::string ts;
    std::string id;
    std::optional<nn::BodyPartClass> cls;
    std::optional<nn::Probabilities> probs;
    double latency_s = 0.0;
    std::string destination;
    RouteStatus status = RouteStatus::Failed;

    bool operator==(const AuditRecord&) const = default;
};

class DiskFull : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AuditCorrupt : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single JSON line, without the trailing newline.
std::string to_json_line(const AuditRecord& r);

/// Throws AuditCorrupt.
AuditRecord parse_json_line(std::string_view line);

/// Current UTC time as ISO-8601 with milliseconds and a Z suffix.
std::string utc_timestamp();

class AuditLog {
public:
    /// Opens (creating if needed) for appending. An unterminated final line
    /// left by a crash is truncated away.
    explicit AuditLog(fs::path path);
    ~AuditLog();

    AuditLog(const AuditLog&) = delete;
    AuditLog& operator=(const AuditLog&) = delete;

    /// One write(2) per record under a mutex, then fdatasync. Throws DiskFull
    /// on ENOSPC/EDQUOT/EFBIG and std::system_error for other failures.
    void append(const AuditRecord& record);

    const fs::path& path() const { return path_; }

private:
    void drop_torn_tail();

    fs::path path_;
    int fd_ = -1;
    std::mutex mutex_;
};

struct ReplayResult {
    std::vector<AuditRecord> records;
    bool dropped_torn_tail = false;

    std::map<RouteStatus, std::size_t> status_counts() const;
    /// Routed records per predicted class.
    std::array<std::size_t, nn::kNumClasses> routed_per_class() const;
};

/// Reads every complete record. A final line that is unterminated or does
/// not parse is treated as torn and dropped; a bad line elsewhere throws
/// AuditCorrupt. A missing or non-regular file replays as empty.
ReplayResult replay_audit(const fs::path& path);

}  // namespace dicomrouter::service
