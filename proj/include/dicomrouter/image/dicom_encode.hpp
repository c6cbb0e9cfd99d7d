#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dicomrouter/dicom/dataset.hpp"
#include "dicomrouter/dicom/pixel.hpp"
#include "dicomrouter/image/image.hpp"

namespace dicomrouter::image {

struct DicomEncodeOptions {
    dicom::TransferSyntax transfer_syntax = dicom::TransferSyntax::ExplicitVRLittleEndian;
    dicom::Photometric photometric = dicom::Photometric::Monochrome2;
    std::string sop_instance_uid;
    std::string body_part;
};

inline constexpr std::int32_t kEncodeMaxStored = 4095;

/// Wraps an image as a 12-bit DICOM whose VOI window (center 2048, width
/// 4096) maps stored value s back to s / 4095, so preprocess() at the same
/// size reproduces the image up to 12-bit quantization. MONOCHROME1 stores
/// inverted samples.
std::vector<std::uint8_t> encode_as_dicom(const ImageTensor& img, const DicomEncodeOptions& options = {});

}  // namespace dicomrouter::image
