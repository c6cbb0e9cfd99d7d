#include "dicomrouter/eval/latency.hpp"

#include <chrono>
#include <stdexcept>

namespace dicomrouter::eval {

LatencyReport latency_benchmark(const nn::Backend& backend,
                                std::span<const image::ImageTensor> images, std::size_t warmup) {
    if (images.empty()) throw std::invalid_argument("latency benchmark needs at least one image");
    LatencyReport report;
    report.warmup = warmup;
    for (std::size_t i = 0; i < warmup; ++i) backend.predict(images[i % images.size()]);

    report.samples_s.reserve(images.size());
    double total = 0.0;
    for (const auto& img : images) {
        const auto start = std::chrono::steady_clock::now();
        backend.predict(img);
        const auto stop = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(stop - start).count();
        report.samples_s.push_back(s);
        total += s;
    }
    report.mean_s = total / static_cast<double>(report.samples_s.size());
    return report;
}

}  // namespace dicomrouter::eval
