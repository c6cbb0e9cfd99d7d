#include "dicomrouter/service/router.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <thread>

#include <httplib.h>

#include "dicomrouter/dicom/errors.hpp"
#include "dicomrouter/dicom/parser.hpp"
#include "dicomrouter/image/pipeline.hpp"

namespace dicomrouter::service {

namespace {

std::string sanitize(const std::string& id) {
    std::string out;
    for (const char c : id) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                        c == '.' || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    if (out.empty() || out[0] == '.') out = "item" + out;
    return out.substr(0, 128);
}

std::string format_probs(const nn::Probabilities& p) {
    std::string out;
    char buf[32];
    for (std::size_t k = 0; k < p.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.6f", k ? "," : "", p[k]);
        out += buf;
    }
    return out;
}

fs::path hash_index_path(const RouteConfig& c) {
    fs::path p = c.audit_log;
    p += ".hashes";
    return p;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

AuditRecord RoutingDecision::audit_record() const {
    return {ts, id, cls, probs, latency_s, destination, status};
}

HttpPoster default_http_poster() {
    return [](const std::string& url, const std::string& body,
              const std::map<std::string, std::string>& headers, double timeout_s) -> int {
        // url is http://host[:port][/path]
        const std::string rest = url.substr(std::string("http://").size());
        const auto slash = rest.find('/');
        const std::string authority = rest.substr(0, slash);
        const std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
        httplib::Client client("http://" + authority);
        const auto secs = static_cast<time_t>(timeout_s);
        const auto usecs = static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        const auto res = client.Post(path, h, body, "application/dicom");
        if (!res) throw DestinationUnavailable(url + ": " + httplib::to_string(res.error()));
        return res->status;
    };
}

Router::Router(RouteConfig config, std::shared_ptr<const nn::Backend> backend)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      audit_((config_.validate(), config_.create_directories(), config_.audit_log)),
      review_(config_.review_store, config_.second_round),
      poster_(default_http_poster()),
      sleeper_([](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); }) {
    if (backend_ && backend_->input_size() != config_.input_size) {
        throw ConfigError("backend expects " + std::to_string(backend_->input_size()) +
                          " px input, config says " + std::to_string(config_.input_size));
    }
    std::ifstream hashes(hash_index_path(config_));
    std::string line;
    while (std::getline(hashes, line)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab != 64) continue;
        seen_hashes_.insert(line.substr(0, tab));
    }
    for (const auto& r : replay_audit(config_.audit_log).records) {
        if (r.status == RouteStatus::Duplicate) continue;
        std::error_code ec;
        if (fs::is_regular_file(r.destination, ec)) stored_[r.id] = r.destination;
    }
    for (const auto& item : review_.all_items()) {
        if (!item.file.empty()) stored_.emplace(item.id, item.file);
    }
}

bool Router::degraded() const {
    std::lock_guard lock(state_mutex_);
    return degraded_;
}

std::optional<fs::path> Router::stored_file(const std::string& id) const {
    std::lock_guard lock(state_mutex_);
    const auto it = stored_.find(id);
    if (it == stored_.end()) return std::nullopt;
    return it->second;
}

void Router::remember(const std::string& id, const fs::path& p) {
    std::lock_guard lock(state_mutex_);
    stored_[id] = p;
}

ClassifyResult Router::classify(std::span<const std::uint8_t> bytes) const {
    if (!backend_) throw BackendUnavailable("no model loaded");
    ClassifyResult out;
    image::ImageTensor img;
    try {
        const auto parsed = dicom::parse_file(bytes);
        const auto* uid = parsed.dataset.find(dicom::tags::kSopInstanceUid);
        out.id = uid && !uid->as_string().empty() ? uid->as_string() : sha256_hex(bytes);
        img = image::preprocess_dataset(parsed.dataset, config_.input_size);
    } catch (const dicom::DicomError& e) {
        const bool not_dicom = e.code() == dicom::ErrorCode::MissingMagic ||
                               e.code() == dicom::ErrorCode::UnsupportedTransferSyntax ||
                               e.code() == dicom::ErrorCode::UnsupportedPixelFormat;
        throw ParseFailure(e.what(), not_dicom);
    } catch (const image::InvalidWindow& e) {
        throw ParseFailure(e.what(), false);
    }
    out.prediction = backend_->predict(img);
    return out;
}

std::string Router::store_atomically(std::span<const std::uint8_t> bytes, const fs::path& dir,
                                     const std::string& stem, const std::string& hash) {
    fs::create_directories(dir);
    const std::string base = sanitize(stem);
    const fs::path tmp = dir / (".tmp-" + hash.substr(0, 16) + "-" +
                                std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DestinationUnavailable("cannot write into " + dir.string());
        }
    }
    std::lock_guard lock(naming_mutex_);
    fs::path target = dir / (base + ".dcm");
    for (int n = 1; fs::exists(target); ++n) {
        target = dir / (base + "-" + hash.substr(0, 12) + (n > 1 ? "-" + std::to_string(n) : "") + ".dcm");
    }
    fs::rename(tmp, target);
    return target.string();
}

void Router::forward_http(const std::string& url, std::span<const std::uint8_t> bytes,
                          const RoutingDecision& d) {
    const std::map<std::string, std::string> headers = {
        {"X-Router-Id", d.id},
        {"X-Router-Class", d.cls ? std::string(nn::to_string(*d.cls)) : ""},
        {"X-Router-Probabilities", d.probs ? format_probs(*d.probs) : ""},
        {"X-Router-Sha256", d.sha256},
    };
    const std::string body(bytes.begin(), bytes.end());
    std::string last_error;
    double delay = config_.retry.base_delay_s;
    for (int attempt = 1; attempt <= config_.retry.attempts; ++attempt) {
        try {
            const int status = poster_(url, body, headers, config_.retry.timeout_s);
            if (status >= 200 && status < 300) return;
            last_error = "HTTP " + std::to_string(status);
        } catch (const std::exception& e) {
            last_error = e.what();
        }
        if (attempt < config_.retry.attempts) {
            sleeper_(delay);
            delay *= config_.retry.multiplier;
        }
    }
    throw DestinationUnavailable(url + " after " + std::to_string(config_.retry.attempts) +
                                 " attempts: " + last_error);
}

RoutingDecision Router::process(std::span<const std::uint8_t> bytes, const std::string& hash,
                                const std::string& name_hint) {
    RoutingDecision d;
    d.sha256 = hash;
    d.ts = utc_timestamp();
    const std::string fallback_stem = name_hint.empty() ? hash : name_hint;

    {
        std::lock_guard lock(state_mutex_);
        if (seen_hashes_.contains(hash)) {
            d.status = RouteStatus::Duplicate;
        }
    }
    if (d.status == RouteStatus::Duplicate) {
        d.id = hash;
        d.detail = "content already ingested";
        d.destination = store_atomically(bytes, config_.quarantine_dir, "duplicate-" + fallback_stem, hash);
        return d;
    }

    ClassifyResult c;
    try {
        c = classify(bytes);
    } catch (const ParseFailure& e) {
        d.id = hash;
        d.status = RouteStatus::Failed;
        d.detail = e.what();
        d.parse_error = true;
        d.not_dicom = e.not_dicom();
        d.destination = store_atomically(bytes, config_.quarantine_dir, fallback_stem, hash);
        remember(d.id, d.destination);
        return d;
    } catch (const nn::BackendFailure& e) {
        d.id = hash;
        d.status = RouteStatus::Failed;
        d.detail = e.what();
        d.destination = store_atomically(bytes, config_.failed_dir, fallback_stem, hash);
        remember(d.id, d.destination);
        return d;
    }

    d.id = c.id;
    d.cls = c.prediction.cls;
    d.probs = c.prediction.probabilities;
    d.latency_s = c.prediction.latency_s;
    const double confidence = *std::max_element(d.probs->begin(), d.probs->end());
    const std::string stem = d.id == hash ? fallback_stem : d.id;

    if (confidence >= config_.threshold) {
        const auto& dest = config_.destinations[static_cast<std::size_t>(nn::code(*d.cls))];
        try {
            if (dest.kind == Destination::Kind::Directory) {
                d.destination = store_atomically(bytes, dest.target, stem, hash);
                remember(d.id, d.destination);
            } else {
                forward_http(dest.target, bytes, d);
                d.destination = dest.target;
            }
            d.status = RouteStatus::Routed;
        } catch (const std::exception& e) {
            d.status = RouteStatus::Failed;
            d.detail = e.what();
            d.destination = store_atomically(bytes, config_.failed_dir, stem, hash);
            remember(d.id, d.destination);
        }
    } else {
        d.destination = store_atomically(bytes, config_.review_dir, stem, hash);
        remember(d.id, d.destination);
        ReviewItem item;
        item.id = d.id;
        item.probabilities = *d.probs;
        item.predicted = *d.cls;
        item.file = d.destination;
        item.queued_ts = d.ts;
        review_.enqueue(std::move(item));
        d.status = RouteStatus::QueuedForReview;
    }

    if (d.status == RouteStatus::Routed || d.status == RouteStatus::QueuedForReview) {
        std::lock_guard lock(state_mutex_);
        seen_hashes_.insert(hash);
        std::ofstream idx(hash_index_path(config_), std::ios::app);
        idx << hash << '\t' << d.id << '\n';
    }
    return d;
}

RoutingDecision Router::ingest(std::span<const std::uint8_t> bytes, const std::string& name_hint) {
    if (!backend_) throw BackendUnavailable("no model loaded");
    if (degraded()) throw DiskFull("audit log unavailable; ingest disabled");
    const std::string hash = sha256_hex(bytes);

    {
        std::unique_lock lock(state_mutex_);
        in_flight_cv_.wait(lock, [&] { return !in_flight_.contains(hash); });
        in_flight_.insert(hash);
    }
    struct Release {
        Router* self;
        const std::string& hash;
        ~Release() {
            {
                std::lock_guard lock(self->state_mutex_);
                self->in_flight_.erase(hash);
            }
            self->in_flight_cv_.notify_all();
        }
    } release{this, hash};

    RoutingDecision d = process(bytes, hash, name_hint);
    try {
        audit_.append(d.audit_record());
    } catch (const DiskFull&) {
        std::lock_guard lock(state_mutex_);
        degraded_ = true;
        throw;
    }
    return d;
}

RoutingDecision Router::ingest_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    in.close();
    RoutingDecision d = ingest(bytes, path.stem().string());
    fs::remove(path);
    return d;
}

}  // namespace dicomrouter::service
