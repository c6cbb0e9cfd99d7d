#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

namespace dicomrouter::service {

namespace fs = std::filesystem;

class WatchSetupFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WatchOptions {
    std::chrono::milliseconds poll_interval{200};
    std::size_t workers = 1;
};

/// Polls a directory and hands each completed file to a worker pool once.
///
/// A file counts as complete when two consecutive polls see the same size
/// and modification time. Names starting with '.' are ignored so writers
/// can stage files under a hidden name. The handler is expected to move or
/// delete the file; a file it leaves behind is not dispatched again unless
/// its size or mtime changes.
class Watcher {
public:
    using Handler = std::function<void(const fs::path&)>;

    /// Throws WatchSetupFailure when `dir` is not an existing directory.
    Watcher(fs::path dir, Handler handler, WatchOptions options = {});
    ~Watcher();

    Watcher(const Watcher&) = delete;
    Watcher& operator=(const Watcher&) = delete;

    void start();
    /// Stops polling, finishes queued work, joins all threads.
    void stop();

    /// One scan; returns how many files were dispatched. Usable without
    /// start() for deterministic tests (the handler then runs on the pool
    /// if started, otherwise inline).
    std::size_t poll_once();

    /// Files dispatched and completed so far.
    std::size_t dispatched() const { return dispatched_.load(); }
    std::size_t completed() const { return completed_.load(); }

    /// Blocks until the queue is empty and no handler is running.
    void wait_idle();

private:
    struct Observation {
        std::uintmax_t size = 0;
        fs::file_time_type mtime;
        bool dispatched = false;
    };

    void poll_loop();
    void worker_loop();
    void run_handler(const fs::path& p);

    fs::path dir_;
    Handler handler_;
    WatchOptions options_;

    std::map<fs::path, Observation> seen_;
    std::mutex scan_mutex_;

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::condition_variable idle_cv_;
    std::deque<fs::path> queue_;
    std::size_t running_ = 0;
    bool stopping_ = false;
    bool started_ = false;

    std::atomic<std::size_t> dispatched_{0};
    std::atomic<std::size_t> completed_{0};
    std::thread poller_;
    std::vector<std::thread> workers_;
};

}  // namespace dicomrouter::service
