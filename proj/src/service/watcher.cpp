#include "dicomrouter/service/watcher.hpp"

#include <iostream>

namespace dicomrouter::service {

Watcher::Watcher(fs::path dir, Handler handler, WatchOptions options)
    : dir_(std::move(dir)), handler_(std::move(handler)), options_(options) {
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) {
        throw WatchSetupFailure("watch directory does not exist: " + dir_.string());
    }
    if (options_.workers == 0) options_.workers = 1;
}

Watcher::~Watcher() { stop(); }

void Watcher::start() {
    std::lock_guard lock(queue_mutex_);
    if (started_) return;
    started_ = true;
    stopping_ = false;
    for (std::size_t i = 0; i < options_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
    poller_ = std::thread([this] { poll_loop(); });
}

void Watcher::stop() {
    {
        std::lock_guard lock(queue_mutex_);
        if (!started_) return;
        stopping_ = true;
    }
    queue_cv_.notify_all();
    if (poller_.joinable()) poller_.join();
    for (auto& t : workers_) {
        if (t.joinable()) t.join();
    }
    workers_.clear();
    std::lock_guard lock(queue_mutex_);
    started_ = false;
}

void Watcher::run_handler(const fs::path& p) {
    try {
        handler_(p);
    } catch (const std::exception& e) {
        std::cerr << "watch: " << p.filename().string() << ": " << e.what() << '\n';
    }
    ++completed_;
}

std::size_t Watcher::poll_once() {
    std::vector<fs::path> ready;
    {
        std::lock_guard lock(scan_mutex_);
        std::set<fs::path> present;
        std::error_code ec;
        for (const auto& entry : fs::directory_iterator(dir_, ec)) {
            if (!entry.is_regular_file(ec)) continue;
            const auto name = entry.path().filename().string();
            if (name.empty() || name[0] == '.') continue;
            const auto size = entry.file_size(ec);
            if (ec) continue;
            const auto mtime = entry.last_write_time(ec);
            if (ec) continue;
            present.insert(entry.path());

            auto it = seen_.find(entry.path());
            if (it == seen_.end()) {
                seen_.emplace(entry.path(), Observation{size, mtime, false});
                continue;
            }
            Observation& o = it->second;
            if (o.size != size || o.mtime != mtime) {
                o = Observation{size, mtime, false};
                continue;
            }
            if (!o.dispatched) {
                o.dispatched = true;
                ready.push_back(entry.path());
            }
        }
        std::erase_if(seen_, [&](const auto& kv) { return !present.contains(kv.first); });
    }

    dispatched_ += ready.size();
    bool pooled = false;
    {
        std::lock_guard lock(queue_mutex_);
        if (started_ && !stopping_) {
            for (auto& p : ready) queue_.push_back(p);
            pooled = true;
        }
    }
    if (pooled) {
        queue_cv_.notify_all();
    } else {
        for (const auto& p : ready) run_handler(p);
    }
    return ready.size();
}

void Watcher::poll_loop() {
    while (true) {
        {
            std::unique_lock lock(queue_mutex_);
            if (queue_cv_.wait_for(lock, options_.poll_interval, [this] { return stopping_; })) return;
        }
        poll_once();
    }
}

void Watcher::worker_loop() {
    while (true) {
        fs::path p;
        {
            std::unique_lock lock(queue_mutex_);
            queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;  // stopping and drained
            p = std::move(queue_.front());
            queue_.pop_front();
            ++running_;
        }
        run_handler(p);
        {
            std::lock_guard lock(queue_mutex_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

void Watcher::wait_idle() {
    std::unique_lock lock(queue_mutex_);
    idle_cv_.wait(lock, [this] { return queue_.empty() && running_ == 0; });
}

}  // namespace dicomrouter::service
