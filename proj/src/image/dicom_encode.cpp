#include "dicomrouter/image/dicom_encode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dicomrouter/dicom/synthetic_writer.hpp"

namespace dicomrouter::image {

std::vector<std::uint8_t> encode_as_dicom(const ImageTensor& img, const DicomEncodeOptions& options) {
    if (!img.is_valid() || img.empty()) throw std::invalid_argument("encode_as_dicom: invalid image");
    dicom::SyntheticImage s;
    s.rows = static_cast<std::uint32_t>(img.height);
    s.cols = static_cast<std::uint32_t>(img.width);
    s.bits_allocated = 16;
    s.bits_stored = 12;
    s.photometric = options.photometric;
    s.transfer_syntax = options.transfer_syntax;
    s.sop_instance_uid = options.sop_instance_uid;
    s.body_part = options.body_part;
    s.window_center = 2048.0;
    s.window_width = 4096.0;
    s.pixels.reserve(img.values.size());
    const bool invert = options.photometric == dicom::Photometric::Monochrome1;
    for (const float v : img.values) {
        const double d = invert ? 1.0 - static_cast<double>(v) : static_cast<double>(v);
        s.pixels.push_back(static_cast<std::int32_t>(
            std::clamp<long>(std::lround(d * kEncodeMaxStored), 0, kEncodeMaxStored)));
    }
    return dicom::write_synthetic_dicom(s);
}

}  // namespace dicomrouter::image
