#include "dicomrouter/nn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dicomrouter::nn {

namespace {

constexpr double kBarPeriod = 0.2;
constexpr double kEdgeSharpness = 4.0;
constexpr double kCrossHalfWidth = 0.06;

double bars(double t, double phase) {
    const double s = std::sin(2.0 * std::numbers::pi * (t / kBarPeriod + phase));
    return 0.5 + 0.5 * std::tanh(kEdgeSharpness * s);
}

}  // namespace

image::ImageTensor render_pattern(BodyPartClass cls, std::size_t size, Xoshiro256ss& rng) {
    // Jitter is drawn in a fixed order regardless of class so every class
    // consumes the same number of draws before the per-pixel noise.
    const double phase = rng.uniform(-0.05, 0.05);
    const double cx = 0.5 + rng.uniform(-0.03, 0.03);
    const double cy = 0.5 + rng.uniform(-0.03, 0.03);
    const double radius = 0.3 + rng.uniform(-0.03, 0.03);
    const double contrast = rng.uniform(0.85, 1.0);
    const double brightness = rng.uniform(-0.05, 0.05);

    image::ImageTensor img(size, size);
    const double n = static_cast<double>(size);
    for (std::size_t r = 0; r < size; ++r) {
        const double y = (static_cast<double>(r) + 0.5) / n;
        for (std::size_t c = 0; c < size; ++c) {
            const double x = (static_cast<double>(c) + 0.5) / n;
            double v = 0.0;
            switch (cls) {
                case BodyPartClass::Abdominal:
                    v = bars(y, phase);
                    break;
                case BodyPartClass::AdultChest:
                    v = bars(x, phase);
                    break;
                case BodyPartClass::PediatricChest: {
                    const double d = std::hypot(x - cx, y - cy);
                    v = 1.0 / (1.0 + std::exp((d - radius) / 0.01));
                    break;
                }
                case BodyPartClass::Spine: {
                    const double d1 = std::abs((x - cx) - (y - cy)) / std::numbers::sqrt2;
                    const double d2 = std::abs((x - cx) + (y - cy)) / std::numbers::sqrt2;
                    const double d = std::min(d1, d2) / kCrossHalfWidth;
                    v = std::exp(-d * d);
                    break;
                }
                case BodyPartClass::Others:
                    v = rng.uniform(0.35, 0.65);
                    break;
            }
            v = 0.5 + brightness + contrast * (v - 0.5) + rng.uniform(-0.04, 0.04);
            img.at(r, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return img;
}

std::vector<LabeledExample> make_synthetic_dataset(std::size_t n_per_class, std::size_t image_size,
                                                   std::uint64_t seed) {
    if (n_per_class == 0) throw std::invalid_argument("n_per_class must be >= 1");
    if (image_size == 0) throw std::invalid_argument("image_size must be >= 1");
    std::vector<LabeledExample> out;
    out.reserve(n_per_class * kNumClasses);
    for (std::size_t j = 0; j < n_per_class * kNumClasses; ++j) {
        const auto cls = kAllClasses[j % kNumClasses];
        auto rng = Xoshiro256ss::for_stream(seed, j);
        out.push_back({render_pattern(cls, image_size, rng), cls});
    }
    return out;
}

}  // namespace dicomrouter::nn
