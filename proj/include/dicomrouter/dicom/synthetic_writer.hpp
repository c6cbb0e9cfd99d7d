#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dicomrouter/dicom/dataset.hpp"
#include "dicomrouter/dicom/pixel.hpp"

namespace dicomrouter::dicom {

/// Description of a single-frame grayscale image to encode. Used for
/// generated inputs (synthetic datasets, test fixtures); not a general
/// DICOM writer.
struct SyntheticImage {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint16_t bits_allocated = 16;
    std::uint16_t bits_stored = 16;
    bool is_signed = false;
    Photometric photometric = Photometric::Monochrome2;
    std::vector<std::int32_t> pixels;  // stored values, row-major
    TransferSyntax transfer_syntax = TransferSyntax::ExplicitVRLittleEndian;
    std::string sop_instance_uid;  // omitted when empty
    std::optional<double> rescale_slope;
    std::optional<double> rescale_intercept;
    std::optional<double> window_center;
    std::optional<double> window_width;
    std::string body_part;  // (0018,0015), omitted when empty
};

std::vector<std::uint8_t> write_synthetic_dicom(const SyntheticImage& image);

}  // namespace dicomrouter::dicom
