#pragma once

#include <cstdint>
#include <vector>

#include "dicomrouter/image/image.hpp"

namespace dicomrouter::image {

/// 8-bit grayscale PNG, sample = round(v * 255).
std::vector<std::uint8_t> export_png(const ImageTensor& img);

/// Encodes already quantized samples (row-major, width*height bytes).
std::vector<std::uint8_t> encode_png_gray8(std::size_t width, std::size_t height,
                                           const std::vector<std::uint8_t>& samples);

std::uint8_t quantize_sample(float v);

}  // namespace dicomrouter::image
