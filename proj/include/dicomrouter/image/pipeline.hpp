#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "dicomrouter/dicom/parser.hpp"
#include "dicomrouter/dicom/pixel.hpp"
#include "dicomrouter/image/image.hpp"

namespace dicomrouter::image {

inline constexpr std::size_t kModelInputSize = 512;

struct WindowSpec {
    double center = 0.0;
    double width = 1.0;
};

class InvalidWindow : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// out = raw * slope + intercept
DecimalMatrix apply_modality_rescale(const dicom::PixelMatrix& raw, double slope, double intercept);

/// DICOM linear VOI function when a window is given, otherwise min-max
/// normalization (a constant image maps to zeros). Throws InvalidWindow when
/// width < 1.
ImageTensor apply_voi_window(const DecimalMatrix& values, std::optional<WindowSpec> window);

/// MONOCHROME1 inverts (v -> 1 - v); MONOCHROME2 is the identity.
ImageTensor apply_photometric(ImageTensor img, dicom::Photometric photometric);

/// Window from the descriptor, if both center and width are present.
std::optional<WindowSpec> window_from(const dicom::PixelDescriptor& desc);

/// parse -> extract -> rescale -> window -> photometric -> resize.
ImageTensor preprocess(std::span<const std::uint8_t> file_bytes,
                       std::size_t out_size = kModelInputSize);

/// Same as preprocess, starting from an already parsed body.
ImageTensor preprocess_dataset(const dicom::DataSet& dataset,
                               std::size_t out_size = kModelInputSize);

}  // namespace dicomrouter::image
