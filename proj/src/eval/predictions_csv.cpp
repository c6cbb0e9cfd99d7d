#include "dicomrouter/eval/predictions_csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dicomrouter::eval {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* what) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw CsvFormatError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                             std::string(field) + "'");
    }
    return value;
}

int parse_class(std::string_view field, std::size_t line_no, const char* what) {
    const int v = parse_number<int>(field, line_no, what);
    if (v < 0 || v >= static_cast<int>(nn::kNumClasses)) {
        throw CsvFormatError("line " + std::to_string(line_no) + ": " + what + " outside 0..4");
    }
    return v;
}

}  // namespace

std::string write_predictions_csv(const std::vector<PredictionRow>& rows) {
    std::string out(kPredictionsHeader);
    out += '\n';
    char buf[64];
    for (const auto& r : rows) {
        if (r.id.find_first_of(",\"\r\n") != std::string::npos) {
            throw std::invalid_argument("id not representable in predictions CSV: " + r.id);
        }
        out += r.id + "," + std::to_string(r.label) + "," + std::to_string(r.pred);
        for (const double p : r.probabilities) {
            std::snprintf(buf, sizeof buf, ",%.17g", p);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::vector<PredictionRow> read_predictions_csv(std::string_view text) {
    std::vector<PredictionRow> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool seen_header = false;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!seen_header) {
            if (line != kPredictionsHeader) {
                throw CsvFormatError("line 1: expected header '" + std::string(kPredictionsHeader) + "'");
            }
            seen_header = true;
            continue;
        }
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 8) {
            throw CsvFormatError("line " + std::to_string(line_no) + ": expected 8 fields, got " +
                                 std::to_string(f.size()));
        }
        PredictionRow r;
        r.id = std::string(f[0]);
        r.label = parse_class(f[1], line_no, "label");
        r.pred = parse_class(f[2], line_no, "pred");
        for (std::size_t k = 0; k < nn::kNumClasses; ++k) {
            r.probabilities[k] = parse_number<double>(f[3 + k], line_no, "probability");
        }
        rows.push_back(std::move(r));
    }
    if (!seen_header) throw CsvFormatError("empty predictions file");
    return rows;
}

std::vector<PredictionRow> read_predictions_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_predictions_csv(ss.str());
}

}  // namespace dicomrouter::eval
