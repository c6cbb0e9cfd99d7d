#pragma once

#include "dicomrouter/image/image.hpp"

namespace dicomrouter::image {

/// Bilinear resampling with half-pixel centers: the source coordinate of
/// output index d is (d + 0.5) * in / out - 0.5, clamped to the image.
ImageTensor resize_bilinear(const ImageTensor& img, std::size_t out_h, std::size_t out_w);

}  // namespace dicomrouter::image
