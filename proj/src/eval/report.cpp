#include "dicomrouter/eval/report.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace dicomrouter::eval {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Display columns of a UTF-8 string (every code point counts as one).
std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (const char c : s) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

void require_ci(const BootstrapCI& ci) {
    if (ci.iterations == 0) throw std::invalid_argument("confidence interval has no iterations");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_ci(const BootstrapCI& ci) {
    require_ci(ci);
    return fixed(ci.point, 3) + " (" + fixed(ci.lo, 3) + "–" + fixed(ci.hi, 3) + ")";
}

std::string emit_report(std::span<const ModelResult> results) {
    if (results.empty()) throw std::invalid_argument("report needs at least one result");
    constexpr std::size_t kCols = 6;
    std::vector<std::array<std::string, kCols>> rows;
    rows.push_back({"Model", "Recall (CI)", "Precision (CI)", "F1-score (CI)", "Inference Time",
                    "#Parameters"});
    for (const auto& r : results) {
        rows.push_back({r.model, format_ci(r.recall), format_ci(r.precision), format_ci(r.f1),
                        fixed(r.inference_s, 4), std::to_string(r.parameters)});
    }
    std::array<std::size_t, kCols> width{};
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < kCols; ++c) width[c] = std::max(width[c], display_width(row[c]));
    }
    std::string out;
    auto emit_row = [&](const std::array<std::string, kCols>& row) {
        for (std::size_t c = 0; c < kCols; ++c) {
            if (c) out += " | ";
            out += row[c];
            if (c + 1 < kCols) out.append(width[c] - display_width(row[c]), ' ');
        }
        out += '\n';
    };
    emit_row(rows[0]);
    for (std::size_t c = 0; c < kCols; ++c) {
        if (c) out += "-|-";
        out.append(width[c], '-');
    }
    out += '\n';
    for (std::size_t i = 1; i < rows.size(); ++i) emit_row(rows[i]);
    return out;
}

std::string emit_report_csv(std::span<const ModelResult> results) {
    if (results.empty()) throw std::invalid_argument("report needs at least one result");
    std::string out =
        "model,recall,recall_lo,recall_hi,precision,precision_lo,precision_hi,f1,f1_lo,f1_hi,"
        "inference_s,parameters\n";
    for (const auto& r : results) {
        out += csv_field(r.model);
        for (const auto* ci : {&r.recall, &r.precision, &r.f1}) {
            require_ci(*ci);
            out += "," + general(ci->point) + "," + general(ci->lo) + "," + general(ci->hi);
        }
        out += "," + general(r.inference_s) + "," + std::to_string(r.parameters) + "\n";
    }
    return out;
}

}  // namespace dicomrouter::eval
