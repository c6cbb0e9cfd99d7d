#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dicomrouter/dicom/dataset.hpp"

namespace dicomrouter::dicom {

enum class Photometric { Monochrome1, Monochrome2 };

struct PixelDescriptor {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint16_t bits_allocated = 0;
    std::uint16_t bits_stored = 0;
    std::uint16_t high_bit = 0;
    bool is_signed = false;
    Photometric photometric = Photometric::Monochrome2;
    double rescale_slope = 1.0;
    double rescale_intercept = 0.0;
    std::optional<double> window_center;
    std::optional<double> window_width;
};

/// Stored pixel values, row-major.
struct PixelMatrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::int32_t> values;

    std::int32_t at(std::uint32_t r, std::uint32_t c) const {
        return values[static_cast<std::size_t>(r) * cols + c];
    }
};

PixelDescriptor read_pixel_descriptor(const DataSet& dataset);

PixelMatrix extract_pixel_data(const DataSet& dataset, const PixelDescriptor& desc);

}  // namespace dicomrouter::dicom
