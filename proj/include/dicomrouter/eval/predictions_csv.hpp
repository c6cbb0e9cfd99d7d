#pragma once

// Predictions interchange file:
//
//   id,label,pred,p0,p1,p2,p3,p4
//
// label and pred are class codes; p0..p4 the predicted probabilities.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dicomrouter/nn/body_part.hpp"

namespace dicomrouter::eval {

class CsvFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PredictionRow {
    std::string id;
    int label = 0;
    int pred = 0;
    nn::Probabilities probabilities{};

    bool operator==(const PredictionRow&) const = default;
};

inline constexpr std::string_view kPredictionsHeader = "id,label,pred,p0,p1,p2,p3,p4";

/// Throws std::invalid_argument for ids containing ',', '"' or line breaks.
std::string write_predictions_csv(const std::vector<PredictionRow>& rows);

/// Throws CsvFormatError with the offending line number.
std::vector<PredictionRow> read_predictions_csv(std::string_view text);

std::vector<PredictionRow> read_predictions_file(const std::filesystem::path& path);

}  // namespace dicomrouter::eval
