#include "dicomrouter/eval/confusion.hpp"

#include <string>

#include "dicomrouter/nn/loss.hpp"

namespace dicomrouter::eval {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts) {
        for (const auto c : row) n += c;
    }
    return n;
}

std::uint64_t ConfusionMatrix::support(std::size_t k) const {
    std::uint64_t n = 0;
    for (const auto c : counts.at(k)) n += c;
    return n;
}

std::uint64_t ConfusionMatrix::predicted_count(std::size_t k) const {
    std::uint64_t n = 0;
    for (const auto& row : counts) n += row.at(k);
    return n;
}

std::uint64_t ConfusionMatrix::correct() const {
    std::uint64_t n = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) n += counts[k][k];
    return n;
}

double ConfusionMatrix::accuracy() const {
    const auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw LengthMismatch(std::to_string(predictions.size()) + " predictions vs " +
                             std::to_string(labels.size()) + " labels");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int a = labels[i];
        const int p = predictions[i];
        if (a < 0 || a >= static_cast<int>(kNumClasses) || p < 0 || p >= static_cast<int>(kNumClasses)) {
            throw nn::LabelOutOfRange("class code outside 0..4 at index " + std::to_string(i));
        }
        ++cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
    }
    return cm;
}

ClassMetrics precision_recall_f1(const ConfusionMatrix& cm, std::size_t k) {
    if (k >= kNumClasses) throw std::out_of_range("class index " + std::to_string(k));
    ClassMetrics m;
    m.tp = cm.counts[k][k];
    m.support = cm.support(k);
    m.fn = m.support - m.tp;
    m.fp = cm.predicted_count(k) - m.tp;
    if (m.tp + m.fp > 0) {
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    } else {
        m.degenerate = true;
    }
    if (m.tp + m.fn > 0) {
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    } else {
        m.degenerate = true;
    }
    if (m.precision > 0.0 && m.recall > 0.0) {
        m.f1 = 2.0 / (1.0 / m.precision + 1.0 / m.recall);
    }
    return m;
}

MacroMetrics macro_metrics(const ConfusionMatrix& cm) {
    MacroMetrics out;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        const auto m = precision_recall_f1(cm, k);
        if (m.degenerate) {
            out.excluded[k] = true;
            continue;
        }
        out.precision += m.precision;
        out.recall += m.recall;
        out.f1 += m.f1;
        ++out.classes_averaged;
    }
    if (out.classes_averaged > 0) {
        const double n = static_cast<double>(out.classes_averaged);
        out.precision /= n;
        out.recall /= n;
        out.f1 /= n;
    }
    return out;
}

}  // namespace dicomrouter::eval
