#include "dicomrouter/service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dicomrouter::service {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string require_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ConfigError(std::string("missing string key '") + key + "'");
    }
    return j.at(key).get<std::string>();
}

}  // namespace

Destination Destination::parse(const std::string& text, const fs::path& base_dir) {
    if (text.empty()) throw ConfigError("empty destination");
    if (text.rfind("https://", 0) == 0) {
        throw ConfigError("https destinations are not supported: " + text);
    }
    if (text.rfind("http://", 0) == 0) return {Kind::Http, text};
    return {Kind::Directory, resolve(base_dir, text).string()};
}

void RouteConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must be in [0,1]");
    if (input_size < 4) throw ConfigError("input_size must be >= 4");
    if (retry.attempts < 1) throw ConfigError("retry.attempts must be >= 1");
    if (retry.base_delay_s < 0.0 || retry.multiplier < 1.0) throw ConfigError("invalid retry backoff");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(poll_interval_s > 0.0)) throw ConfigError("poll_interval_s must be > 0");
    for (std::size_t k = 0; k < nn::kNumClasses; ++k) {
        if (destinations[k].target.empty()) {
            throw ConfigError("no destination for class " +
                              std::string(nn::to_string(nn::kAllClasses[k])));
        }
    }
    for (const auto* p : {&review_dir, &quarantine_dir, &failed_dir, &audit_log, &review_store}) {
        if (p->empty()) throw ConfigError("a required path is empty");
    }
    split_listen(listen);
}

void RouteConfig::create_directories() const {
    for (const auto& d : destinations) {
        if (d.kind == Destination::Kind::Directory) fs::create_directories(d.target);
    }
    for (const auto* p : {&review_dir, &quarantine_dir, &failed_dir}) fs::create_directories(*p);
    if (!watch_dir.empty()) fs::create_directories(watch_dir);
    for (const auto* p : {&audit_log, &review_store}) {
        if (p->has_parent_path()) fs::create_directories(p->parent_path());
    }
}

RouteConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    RouteConfig c;
    try {
        const auto& dest = j.at("destinations");
        if (!dest.is_object()) throw ConfigError("'destinations' must be an object");
        for (const auto& [key, value] : dest.items()) {
            const auto cls = nn::parse_body_part(key);
            if (!cls) throw ConfigError("unknown class in destinations: " + key);
            if (!value.is_string()) throw ConfigError("destination for " + key + " must be a string");
            c.destinations[static_cast<std::size_t>(nn::code(*cls))] =
                Destination::parse(value.get<std::string>(), base_dir);
        }
        c.threshold = j.value("threshold", c.threshold);
        if (j.contains("watch_dir")) c.watch_dir = resolve(base_dir, require_string(j, "watch_dir"));
        c.review_dir = resolve(base_dir, require_string(j, "review_dir"));
        c.quarantine_dir = resolve(base_dir, require_string(j, "quarantine_dir"));
        c.failed_dir = resolve(base_dir, require_string(j, "failed_dir"));
        c.audit_log = resolve(base_dir, require_string(j, "audit_log"));
        c.review_store = j.contains("review_store")
                             ? resolve(base_dir, require_string(j, "review_store"))
                             : c.audit_log.parent_path() / "review_labels.jsonl";
        if (j.contains("weights") && !j.at("weights").is_null()) {
            c.weights = resolve(base_dir, require_string(j, "weights"));
        }
        c.input_size = j.value("input_size", c.input_size);
        c.listen = j.value("listen", c.listen);
        if (j.contains("retry")) {
            const auto& r = j.at("retry");
            c.retry.attempts = r.value("attempts", c.retry.attempts);
            c.retry.base_delay_s = r.value("base_delay_s", c.retry.base_delay_s);
            c.retry.multiplier = r.value("multiplier", c.retry.multiplier);
            c.retry.timeout_s = r.value("timeout_s", c.retry.timeout_s);
        }
        if (j.contains("api_token") && !j.at("api_token").is_null()) {
            c.api_token = require_string(j, "api_token");
        }
        const std::string mode = j.value("second_round", std::string("all"));
        if (mode == "all") {
            c.second_round = SecondRoundMode::All;
        } else if (mode == "disagreements") {
            c.second_round = SecondRoundMode::Disagreements;
        } else {
            throw ConfigError("second_round must be 'all' or 'disagreements'");
        }
        c.workers = j.value("workers", c.workers);
        c.poll_interval_s = j.value("poll_interval_s", c.poll_interval_s);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

RouteConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) base = fs::current_path();
    return parse_config(ss.str(), fs::absolute(base));
}

void apply_env_overrides(RouteConfig& config) {
    if (const char* v = std::getenv("ROUTER_LISTEN"); v && *v) {
        split_listen(v);
        config.listen = v;
    }
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos || colon == 0) throw ConfigError("listen must be host:port");
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(listen.substr(colon + 1), &used);
        if (used != listen.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ConfigError("bad port in listen address: " + listen);
    }
    if (port < 0 || port > 65535) throw ConfigError("port out of range: " + listen);
    return {listen.substr(0, colon), port};
}

}  // namespace dicomrouter::service
