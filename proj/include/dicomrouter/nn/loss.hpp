#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dicomrouter::nn {

class NonFiniteInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class LabelOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

enum class Reduction { Sum, Mean };

/// exp(z_i) / sum_j exp(z_j), evaluated after subtracting max(z).
std::vector<double> softmax(std::span<const double> logits);

/// log(sum_j exp(z_j)), stable.
double log_sum_exp(std::span<const double> logits);

/// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Softmax cross-entropy over a row-major batch x classes logit matrix.
/// Per-example loss is logsumexp(z) - z_y.
double cross_entropy_loss(std::span<const double> logits, std::size_t num_classes,
                          std::span<const int> labels, Reduction reduction = Reduction::Mean);

/// Loss and d(loss)/d(logits), same layout as `logits`.
struct LossGradient {
    double loss = 0.0;
    std::vector<double> grad;
};

LossGradient cross_entropy_with_grad(std::span<const double> logits, std::size_t num_classes,
                                     std::span<const int> labels,
                                     Reduction reduction = Reduction::Mean);

}  // namespace dicomrouter::nn
