#include "dicomrouter/dicom/pixel.hpp"

#include <string>

#include "dicomrouter/dicom/errors.hpp"

namespace dicomrouter::dicom {

namespace {

std::int64_t required_integer(const DataSet& ds, Tag tag) {
    const DataElement* el = ds.find(tag);
    if (el == nullptr) throw DicomError(ErrorCode::MissingRequiredTag, "required attribute absent", tag);
    const auto values = el->integers();
    if (values.empty()) throw DicomError(ErrorCode::MissingRequiredTag, "required attribute empty", tag);
    return values.front();
}

std::optional<double> first_decimal(const DataSet& ds, Tag tag) {
    const DataElement* el = ds.find(tag);
    if (el == nullptr) return std::nullopt;
    const auto values = el->decimals();
    if (values.empty()) return std::nullopt;
    return values.front();
}

}  // namespace

PixelDescriptor read_pixel_descriptor(const DataSet& ds) {
    PixelDescriptor d;
    const auto rows = required_integer(ds, tags::kRows);
    const auto cols = required_integer(ds, tags::kColumns);
    const auto bits_allocated = required_integer(ds, tags::kBitsAllocated);
    const auto bits_stored = required_integer(ds, tags::kBitsStored);
    const auto representation = required_integer(ds, tags::kPixelRepresentation);

    const DataElement* photometric = ds.find(tags::kPhotometricInterpretation);
    if (photometric == nullptr) {
        throw DicomError(ErrorCode::MissingRequiredTag, "required attribute absent",
                         tags::kPhotometricInterpretation);
    }
    const std::string pi = photometric->as_string();
    if (pi == "MONOCHROME1") {
        d.photometric = Photometric::Monochrome1;
    } else if (pi == "MONOCHROME2") {
        d.photometric = Photometric::Monochrome2;
    } else {
        throw DicomError(ErrorCode::UnsupportedPixelFormat, "photometric interpretation '" + pi + "'",
                         tags::kPhotometricInterpretation);
    }

    if (const DataElement* spp = ds.find(tags::kSamplesPerPixel)) {
        const auto v = spp->integers();
        if (!v.empty() && v.front() != 1) {
            throw DicomError(ErrorCode::UnsupportedPixelFormat,
                             "samples per pixel " + std::to_string(v.front()), tags::kSamplesPerPixel);
        }
    }
    if (rows <= 0 || cols <= 0) {
        throw DicomError(ErrorCode::UnsupportedPixelFormat, "empty image matrix", tags::kRows);
    }
    if (bits_allocated != 8 && bits_allocated != 16) {
        throw DicomError(ErrorCode::UnsupportedPixelFormat,
                         "bits allocated " + std::to_string(bits_allocated), tags::kBitsAllocated);
    }
    if (bits_stored < 1 || bits_stored > bits_allocated) {
        throw DicomError(ErrorCode::UnsupportedPixelFormat,
                         "bits stored " + std::to_string(bits_stored), tags::kBitsStored);
    }
    if (representation != 0 && representation != 1) {
        throw DicomError(ErrorCode::UnsupportedPixelFormat,
                         "pixel representation " + std::to_string(representation),
                         tags::kPixelRepresentation);
    }
    if (const DataElement* hb = ds.find(tags::kHighBit)) {
        const auto v = hb->integers();
        if (!v.empty() && v.front() != bits_stored - 1) {
            throw DicomError(ErrorCode::UnsupportedPixelFormat,
                             "high bit " + std::to_string(v.front()) + " is not bits stored - 1",
                             tags::kHighBit);
        }
    }

    d.rows = static_cast<std::uint32_t>(rows);
    d.cols = static_cast<std::uint32_t>(cols);
    d.bits_allocated = static_cast<std::uint16_t>(bits_allocated);
    d.bits_stored = static_cast<std::uint16_t>(bits_stored);
    d.high_bit = static_cast<std::uint16_t>(bits_stored - 1);
    d.is_signed = representation == 1;
    d.rescale_slope = first_decimal(ds, tags::kRescaleSlope).value_or(1.0);
    d.rescale_intercept = first_decimal(ds, tags::kRescaleIntercept).value_or(0.0);
    d.window_center = first_decimal(ds, tags::kWindowCenter);
    d.window_width = first_decimal(ds, tags::kWindowWidth);
    return d;
}

PixelMatrix extract_pixel_data(const DataSet& ds, const PixelDescriptor& desc) {
    const DataElement* el = ds.find(tags::kPixelData);
    if (el == nullptr || el->undefined_length()) {
        throw DicomError(ErrorCode::PixelDataMissing, "no native pixel data", tags::kPixelData);
    }
    const std::size_t count = static_cast<std::size_t>(desc.rows) * desc.cols;
    const std::size_t bytes_per_sample = desc.bits_allocated / 8;
    const std::size_t expected = count * bytes_per_sample;
    const std::size_t actual = el->value.size();
    if (actual != expected && !(expected % 2 == 1 && actual == expected + 1)) {
        throw DicomError(ErrorCode::LengthMismatch,
                         "expected " + std::to_string(expected) + " bytes, found " +
                             std::to_string(actual),
                         tags::kPixelData);
    }

    const std::uint32_t mask =
        desc.bits_stored >= 32 ? 0xFFFFFFFFu : ((1u << desc.bits_stored) - 1u);
    const std::uint32_t sign_bit = 1u << (desc.bits_stored - 1);

    PixelMatrix out;
    out.rows = desc.rows;
    out.cols = desc.cols;
    out.values.resize(count);
    const std::uint8_t* src = el->value.data();
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t raw = bytes_per_sample == 1
                                ? src[i]
                                : static_cast<std::uint32_t>(src[2 * i] | (src[2 * i + 1] << 8));
        raw &= mask;
        std::int32_t v = static_cast<std::int32_t>(raw);
        if (desc.is_signed && (raw & sign_bit) != 0) {
            v = static_cast<std::int32_t>(raw) - static_cast<std::int32_t>(mask) - 1;
        }
        out.values[i] = v;
    }
    return out;
}

}  // namespace dicomrouter::dicom
