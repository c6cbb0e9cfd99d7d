#pragma once

#include <span>
#include <vector>

#include "dicomrouter/image/image.hpp"
#include "dicomrouter/nn/backend.hpp"

namespace dicomrouter::eval {

struct LatencyReport {
    double mean_s = 0.0;
    std::vector<double> samples_s;  // one per measured image, warmup excluded
    std::size_t warmup = 0;
};

/// Runs `warmup` unrecorded predictions (cycling through `images`), then
/// times one predict() call per image with a steady clock. Throws
/// std::invalid_argument when `images` is empty.
LatencyReport latency_benchmark(const nn::Backend& backend,
                                std::span<const image::ImageTensor> images,
                                std::size_t warmup = 5);

}  // namespace dicomrouter::eval
