#include "dicomrouter/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dicomrouter::nn {

namespace {

void require_finite(std::span<const double> z) {
    for (const double v : z) {
        if (!std::isfinite(v)) throw NonFiniteInput("logit is not finite");
    }
}

void check_batch(std::span<const double> logits, std::size_t k, std::span<const int> labels) {
    if (k == 0 || logits.size() != labels.size() * k) {
        throw std::invalid_argument("logit count does not match labels x classes");
    }
    for (const int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= k) {
            throw LabelOutOfRange("label " + std::to_string(y) + " outside 0.." + std::to_string(k - 1));
        }
    }
}

}  // namespace

std::vector<double> softmax(std::span<const double> z) {
    require_finite(z);
    std::vector<double> out(z.size());
    if (z.empty()) return out;
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

double log_sum_exp(std::span<const double> z) {
    require_finite(z);
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (const double v : z) total += std::exp(v - m);
    return m + std::log(total);
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

double cross_entropy_loss(std::span<const double> logits, std::size_t k, std::span<const int> labels,
                          Reduction reduction) {
    check_batch(logits, k, labels);
    double total = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const auto row = logits.subspan(b * k, k);
        total += log_sum_exp(row) - row[static_cast<std::size_t>(labels[b])];
    }
    if (reduction == Reduction::Mean && !labels.empty()) total /= static_cast<double>(labels.size());
    return total;
}

LossGradient cross_entropy_with_grad(std::span<const double> logits, std::size_t k,
                                     std::span<const int> labels, Reduction reduction) {
    check_batch(logits, k, labels);
    LossGradient out;
    out.grad.resize(logits.size());
    const double scale =
        reduction == Reduction::Mean && !labels.empty() ? 1.0 / static_cast<double>(labels.size()) : 1.0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const auto row = logits.subspan(b * k, k);
        const auto y = static_cast<std::size_t>(labels[b]);
        out.loss += log_sum_exp(row) - row[y];
        const auto p = softmax(row);
        for (std::size_t j = 0; j < k; ++j) {
            out.grad[b * k + j] = (p[j] - (j == y ? 1.0 : 0.0)) * scale;
        }
    }
    out.loss *= scale;
    return out;
}

}  // namespace dicomrouter::nn
