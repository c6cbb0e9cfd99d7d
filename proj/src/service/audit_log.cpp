#include "dicomrouter/service/audit_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace dicomrouter::service {

using nlohmann::json;

std::string_view to_string(RouteStatus s) {
    switch (s) {
        case RouteStatus::Routed: return "routed";
        case RouteStatus::QueuedForReview: return "queued_for_review";
        case RouteStatus::Failed: return "failed";
        case RouteStatus::Duplicate: return "duplicate";
    }
    return "failed";
}

std::optional<RouteStatus> parse_route_status(std::string_view s) {
    for (const auto st : {RouteStatus::Routed, RouteStatus::QueuedForReview, RouteStatus::Failed,
                          RouteStatus::Duplicate}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - secs).count();
    const std::time_t t = std::chrono::system_clock::to_time_t(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

std::string to_json_line(const AuditRecord& r) {
    // Key order is fixed by hand; nlohmann's object type would sort it.
    json probs = nullptr;
    if (r.probs) probs = json(std::vector<double>(r.probs->begin(), r.probs->end()));
    std::string out = "{\"ts\":" + json(r.ts).dump() + ",\"id\":" + json(r.id).dump() +
                      ",\"class\":" + (r.cls ? json(std::string(nn::to_string(*r.cls))).dump() : "null") +
                      ",\"probs\":" + probs.dump() + ",\"latency_s\":" + json(r.latency_s).dump() +
                      ",\"destination\":" + json(r.destination).dump() +
                      ",\"status\":" + json(std::string(to_string(r.status))).dump() + "}";
    return out;
}

AuditRecord parse_json_line(std::string_view line) {
    try {
        const json j = json::parse(line);
        AuditRecord r;
        r.ts = j.at("ts").get<std::string>();
        r.id = j.at("id").get<std::string>();
        if (!j.at("class").is_null()) {
            const auto cls = nn::parse_body_part(j.at("class").get<std::string>());
            if (!cls) throw AuditCorrupt("unknown class");
            r.cls = *cls;
        }
        if (!j.at("probs").is_null()) {
            const auto v = j.at("probs").get<std::vector<double>>();
            if (v.size() != nn::kNumClasses) throw AuditCorrupt("probs must have 5 entries");
            nn::Probabilities p{};
            std::copy(v.begin(), v.end(), p.begin());
            r.probs = p;
        }
        r.latency_s = j.at("latency_s").get<double>();
        r.destination = j.at("destination").get<std::string>();
        const auto st = parse_route_status(j.at("status").get<std::string>());
        if (!st) throw AuditCorrupt("unknown status");
        r.status = *st;
        return r;
    } catch (const json::exception& e) {
        throw AuditCorrupt(std::string("bad audit line: ") + e.what());
    }
}

AuditLog::AuditLog(fs::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw std::system_error(errno, std::generic_category(), "open audit log " + path_.string());
    }
    drop_torn_tail();
}

// A crash mid-append leaves an unterminated final line. Cut it off so the
// next record starts on a fresh line.
void AuditLog::drop_torn_tail() {
    std::error_code ec;
    if (!fs::is_regular_file(path_, ec)) return;
    const auto size = fs::file_size(path_, ec);
    if (ec || size == 0) return;
    std::ifstream in(path_, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.empty() || text.back() == '\n') return;
    const auto last_newline = text.rfind('\n');
    const off_t keep = last_newline == std::string::npos ? 0 : static_cast<off_t>(last_newline + 1);
    if (::ftruncate(fd_, keep) != 0) {
        throw std::system_error(errno, std::generic_category(), "truncate torn audit tail");
    }
}

AuditLog::~AuditLog() {
    if (fd_ >= 0) ::close(fd_);
}

void AuditLog::append(const AuditRecord& record) {
    const std::string line = to_json_line(record) + "\n";
    std::lock_guard lock(mutex_);
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == ENOSPC || errno == EDQUOT || errno == EFBIG) {
                throw DiskFull("audit log " + path_.string() + ": " + std::strerror(errno));
            }
            throw std::system_error(errno, std::generic_category(), "write audit log");
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fdatasync(fd_) != 0 && errno != EINVAL && errno != EROFS) {
        if (errno == ENOSPC || errno == EDQUOT) throw DiskFull("audit log sync: out of space");
        throw std::system_error(errno, std::generic_category(), "sync audit log");
    }
}

std::map<RouteStatus, std::size_t> ReplayResult::status_counts() const {
    std::map<RouteStatus, std::size_t> out;
    for (const auto& r : records) ++out[r.status];
    return out;
}

std::array<std::size_t, nn::kNumClasses> ReplayResult::routed_per_class() const {
    std::array<std::size_t, nn::kNumClasses> out{};
    for (const auto& r : records) {
        if (r.status == RouteStatus::Routed && r.cls) ++out[static_cast<std::size_t>(nn::code(*r.cls))];
    }
    return out;
}

ReplayResult replay_audit(const fs::path& path) {
    ReplayResult result;
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return result;
    std::ifstream in(path, std::ios::binary);
    if (!in) return result;
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        const bool terminated = eol != std::string::npos;
        const std::string_view line(text.data() + pos, (terminated ? eol : text.size()) - pos);
        pos = terminated ? eol + 1 : text.size();
        ++line_no;
        const bool last = pos >= text.size();
        if (line.empty()) continue;
        if (!terminated) {
            result.dropped_torn_tail = true;
            break;
        }
        try {
            result.records.push_back(parse_json_line(line));
        } catch (const AuditCorrupt& e) {
            if (last) {
                result.dropped_torn_tail = true;
                break;
            }
            throw AuditCorrupt("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return result;
}

}  // namespace dicomrouter::service
