#pragma once

#include <span>
#include <string>

#include "dicomrouter/eval/bootstrap.hpp"

namespace dicomrouter::eval {

struct ModelResult {
    std::string model;
    BootstrapCI recall;
    BootstrapCI precision;
    BootstrapCI f1;
    double inference_s = 0.0;
    std::size_t parameters = 0;
};

/// "0.982 (0.977–0.988)" with an en dash. Throws std::invalid_argument for
/// a CI computed from zero iterations.
std::string format_ci(const BootstrapCI& ci);

/// Aligned plain-text table:
///   Model | Recall (CI) | Precision (CI) | F1-score (CI) | Inference Time | #Parameters
/// Throws std::invalid_argument when `results` is empty.
std::string emit_report(std::span<const ModelResult> results);

/// Same columns as CSV, with point, lo and hi in separate fields.
std::string emit_report_csv(std::span<const ModelResult> results);

}  // namespace dicomrouter::eval
