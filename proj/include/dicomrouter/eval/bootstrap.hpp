#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dicomrouter::eval {

class EmptyInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using MetricFn = std::function<double(std::span<const int> predictions, std::span<const int> labels)>;

struct BootstrapCI {
    double point = 0.0;  // metric on the observed sample
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> replicates;  // in iteration order
};

inline constexpr std::size_t kDefaultBootstrapIterations = 10000;

/// Percentile bootstrap. Replicate i resamples N pairs with replacement
/// using Xoshiro256ss::for_stream(seed, i), so any subset of replicates can
/// be recomputed independently. Throws EmptyInput when N == 0,
/// LengthMismatch on unequal lengths, std::invalid_argument when
/// iterations == 0 or level is outside (0,1).
BootstrapCI bootstrap_ci(std::span<const int> predictions, std::span<const int> labels,
                         const MetricFn& metric,
                         std::size_t iterations = kDefaultBootstrapIterations,
                         double level = 0.95, std::uint64_t seed = 0);

/// Linear interpolation between closest ranks: position q * (n - 1) in the
/// sorted sample.
double percentile(std::vector<double> values, double q);

namespace metrics {
double accuracy(std::span<const int> predictions, std::span<const int> labels);
double macro_precision(std::span<const int> predictions, std::span<const int> labels);
double macro_recall(std::span<const int> predictions, std::span<const int> labels);
double macro_f1(std::span<const int> predictions, std::span<const int> labels);
}  // namespace metrics

}  // namespace dicomrouter::eval
