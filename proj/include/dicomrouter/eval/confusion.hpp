#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "dicomrouter/nn/body_part.hpp"

namespace dicomrouter::eval {

using nn::kNumClasses;

class LengthMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// counts[actual][predicted].
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

    std::uint64_t total() const;
    std::uint64_t support(std::size_t k) const;         // row sum
    std::uint64_t predicted_count(std::size_t k) const;  // column sum
    std::uint64_t correct() const;                       // trace
    double accuracy() const;                             // 0 when empty
};

/// Throws LengthMismatch, or nn::LabelOutOfRange for codes outside 0..4.
ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    // Set when TP+FP or TP+FN is zero; the affected ratio is reported as 0.
    bool degenerate = false;
};

/// One-vs-rest metrics for class k.
ClassMetrics precision_recall_f1(const ConfusionMatrix& cm, std::size_t k);

struct MacroMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t classes_averaged = 0;
    std::array<bool, kNumClasses> excluded{};  // degenerate classes left out
};

/// Unweighted mean over the non-degenerate classes; all zero when none
/// qualify.
MacroMetrics macro_metrics(const ConfusionMatrix& cm);

}  // namespace dicomrouter::eval
