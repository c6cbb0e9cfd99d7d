#pragma once

// Router configuration, read from a JSON file. See config/router.example.json
// for every key. Relative paths resolve against the config file's directory.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "dicomrouter/nn/body_part.hpp"

namespace dicomrouter::service {

namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Destination {
    enum class Kind { Directory, Http };
    Kind kind = Kind::Directory;
    std::string target;  // directory path or http:// URL

    static Destination parse(const std::string& text, const fs::path& base_dir);
};

struct RetryPolicy {
    int attempts = 3;             // total HTTP attempts before giving up
    double base_delay_s = 0.5;    // wait after the first failure
    double multiplier = 2.0;      // growth of the wait per further failure
    double timeout_s = 5.0;       // per-attempt connect/read timeout
};

enum class SecondRoundMode { All, Disagreements };

struct RouteConfig {
    std::array<Destination, nn::kNumClasses> destinations;
    double threshold = 0.9;
    fs::path watch_dir;
    fs::path review_dir;
    fs::path quarantine_dir;
    fs::path failed_dir;
    fs::path audit_log;
    fs::path review_store;
    std::optional<fs::path> weights;
    std::size_t input_size = 512;
    std::string listen = "127.0.0.1:8080";
    RetryPolicy retry;
    std::optional<std::string> api_token;
    SecondRoundMode second_round = SecondRoundMode::All;
    std::size_t workers = 2;
    double poll_interval_s = 0.2;

    /// Throws ConfigError on any invariant violation.
    void validate() const;

    /// Creates the directories the router writes to.
    void create_directories() const;
};

RouteConfig parse_config(const std::string& json_text, const fs::path& base_dir);
RouteConfig load_config(const fs::path& path);

/// ROUTER_LISTEN replaces `listen` when set.
void apply_env_overrides(RouteConfig& config);

/// "host:port" split. Throws ConfigError.
std::pair<std::string, int> split_listen(const std::string& listen);

}  // namespace dicomrouter::service
