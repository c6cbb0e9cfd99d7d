#include "dicomrouter/eval/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dicomrouter/eval/confusion.hpp"
#include "dicomrouter/rng.hpp"

namespace dicomrouter::eval {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw EmptyInput("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile rank outside [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(pos));
    const std::size_t above = std::min(below + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(below);
    return values[below] + frac * (values[above] - values[below]);
}

BootstrapCI bootstrap_ci(std::span<const int> predictions, std::span<const int> labels,
                         const MetricFn& metric, std::size_t iterations, double level,
                         std::uint64_t seed) {
    if (predictions.size() != labels.size()) {
        throw LengthMismatch(std::to_string(predictions.size()) + " predictions vs " +
                             std::to_string(labels.size()) + " labels");
    }
    if (labels.empty()) throw EmptyInput("bootstrap needs at least one example");
    if (iterations == 0) throw std::invalid_argument("bootstrap iterations must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level outside (0,1)");

    BootstrapCI ci;
    ci.level = level;
    ci.iterations = iterations;
    ci.seed = seed;
    ci.point = metric(predictions, labels);
    ci.replicates.reserve(iterations);

    const std::size_t n = labels.size();
    std::vector<int> rp(n), rl(n);
    for (std::size_t it = 0; it < iterations; ++it) {
        auto rng = Xoshiro256ss::for_stream(seed, it);
        for (std::size_t j = 0; j < n; ++j) {
            const auto idx = static_cast<std::size_t>(rng.below(n));
            rp[j] = predictions[idx];
            rl[j] = labels[idx];
        }
        ci.replicates.push_back(metric(rp, rl));
    }
    const double tail = (1.0 - level) / 2.0;
    ci.lo = percentile(ci.replicates, tail);
    ci.hi = percentile(ci.replicates, 1.0 - tail);
    return ci;
}

namespace metrics {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    return confusion_matrix(predictions, labels).accuracy();
}
double macro_precision(std::span<const int> predictions, std::span<const int> labels) {
    return macro_metrics(confusion_matrix(predictions, labels)).precision;
}
double macro_recall(std::span<const int> predictions, std::span<const int> labels) {
    return macro_metrics(confusion_matrix(predictions, labels)).recall;
}
double macro_f1(std::span<const int> predictions, std::span<const int> labels) {
    return macro_metrics(confusion_matrix(predictions, labels)).f1;
}

}  // namespace metrics

}  // namespace dicomrouter::eval
