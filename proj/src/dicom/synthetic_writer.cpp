#include "dicomrouter/dicom/synthetic_writer.hpp"

#include <cstdio>
#include <cstring>
#include <map>
#include <stdexcept>

#include "dicomrouter/dicom/tag.hpp"
#include "dictionary.hpp"

namespace dicomrouter::dicom {

namespace {

constexpr std::string_view kSecondaryCaptureSopClass = "1.2.840.10008.5.1.4.1.1.7";

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

struct Value {
    Vr vr;
    std::vector<std::uint8_t> bytes;
};

Value text(Vr vr, std::string_view s) {
    std::vector<std::uint8_t> b(s.begin(), s.end());
    if (b.size() % 2) b.push_back(vr == Vr::UI ? 0 : ' ');
    return {vr, std::move(b)};
}

Value us(std::uint16_t v) {
    Value out{Vr::US, {}};
    put16(out.bytes, v);
    return out;
}

Value decimal(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return text(Vr::DS, buf);
}

void write_element(std::vector<std::uint8_t>& out, Tag tag, const Value& v, bool explicit_vr) {
    put16(out, tag.group);
    put16(out, tag.element);
    const auto len = static_cast<std::uint32_t>(v.bytes.size());
    if (explicit_vr) {
        const auto code = to_string(v.vr);
        out.push_back(static_cast<std::uint8_t>(code[0]));
        out.push_back(static_cast<std::uint8_t>(code[1]));
        if (has_long_length(v.vr)) {
            put16(out, 0);
            put32(out, len);
        } else {
            put16(out, static_cast<std::uint16_t>(len));
        }
    } else {
        put32(out, len);
    }
    out.insert(out.end(), v.bytes.begin(), v.bytes.end());
}

}  // namespace

std::vector<std::uint8_t> write_synthetic_dicom(const SyntheticImage& img) {
    if (img.pixels.size() != static_cast<std::size_t>(img.rows) * img.cols) {
        throw std::invalid_argument("write_synthetic_dicom: pixel count does not match rows*cols");
    }
    if (img.bits_allocated != 8 && img.bits_allocated != 16) {
        throw std::invalid_argument("write_synthetic_dicom: bits allocated must be 8 or 16");
    }
    const bool explicit_vr = img.transfer_syntax == TransferSyntax::ExplicitVRLittleEndian;
    const std::string_view ts_uid = explicit_vr ? kExplicitVrLittleEndianUid : kImplicitVrLittleEndianUid;

    std::map<Tag, Value> body;
    body[{0x0008, 0x0016}] = text(Vr::UI, kSecondaryCaptureSopClass);
    if (!img.sop_instance_uid.empty()) body[tags::kSopInstanceUid] = text(Vr::UI, img.sop_instance_uid);
    body[{0x0008, 0x0060}] = text(Vr::CS, "DX");
    if (!img.body_part.empty()) body[{0x0018, 0x0015}] = text(Vr::CS, img.body_part);
    body[tags::kSamplesPerPixel] = us(1);
    body[tags::kPhotometricInterpretation] =
        text(Vr::CS, img.photometric == Photometric::Monochrome1 ? "MONOCHROME1" : "MONOCHROME2");
    body[tags::kRows] = us(static_cast<std::uint16_t>(img.rows));
    body[tags::kColumns] = us(static_cast<std::uint16_t>(img.cols));
    body[tags::kBitsAllocated] = us(img.bits_allocated);
    body[tags::kBitsStored] = us(img.bits_stored);
    body[tags::kHighBit] = us(static_cast<std::uint16_t>(img.bits_stored - 1));
    body[tags::kPixelRepresentation] = us(img.is_signed ? 1 : 0);
    if (img.window_center) body[tags::kWindowCenter] = decimal(*img.window_center);
    if (img.window_width) body[tags::kWindowWidth] = decimal(*img.window_width);
    if (img.rescale_intercept) body[tags::kRescaleIntercept] = decimal(*img.rescale_intercept);
    if (img.rescale_slope) body[tags::kRescaleSlope] = decimal(*img.rescale_slope);

    Value pixels{img.bits_allocated == 8 && explicit_vr ? Vr::OB : Vr::OW, {}};
    for (const std::int32_t p : img.pixels) {
        if (img.bits_allocated == 8) {
            pixels.bytes.push_back(static_cast<std::uint8_t>(p));
        } else {
            put16(pixels.bytes, static_cast<std::uint16_t>(p));
        }
    }
    if (pixels.bytes.size() % 2) pixels.bytes.push_back(0);
    body[tags::kPixelData] = std::move(pixels);

    std::vector<std::uint8_t> meta_body;
    write_element(meta_body, {0x0002, 0x0001}, Value{Vr::OB, {0x00, 0x01}}, true);
    write_element(meta_body, {0x0002, 0x0002}, text(Vr::UI, kSecondaryCaptureSopClass), true);
    if (!img.sop_instance_uid.empty()) {
        write_element(meta_body, {0x0002, 0x0003}, text(Vr::UI, img.sop_instance_uid), true);
    }
    write_element(meta_body, tags::kTransferSyntaxUid, text(Vr::UI, ts_uid), true);

    std::vector<std::uint8_t> out(132, 0);
    std::memcpy(out.data() + 128, "DICM", 4);
    Value group_length{Vr::UL, {}};
    put32(group_length.bytes, static_cast<std::uint32_t>(meta_body.size()));
    write_element(out, {0x0002, 0x0000}, group_length, true);
    out.insert(out.end(), meta_body.begin(), meta_body.end());
    for (const auto& [tag, value] : body) {
        // Implicit bodies rely on the reader's dictionary agreeing with these VRs.
        if (!explicit_vr && detail::implicit_vr(tag) != value.vr && value.vr != Vr::OB) {
            throw std::logic_error("write_synthetic_dicom: dictionary VR mismatch for " + tag.to_string());
        }
        write_element(out, tag, value, explicit_vr);
    }
    return out;
}

}  // namespace dicomrouter::dicom
