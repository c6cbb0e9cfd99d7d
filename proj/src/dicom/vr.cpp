#include "dicomrouter/dicom/vr.hpp"

#include <array>
#include <cstdio>

#include "dicomrouter/dicom/errors.hpp"
#include "dicomrouter/dicom/tag.hpp"

namespace dicomrouter::dicom {

namespace {

constexpr std::array<std::string_view, 31> kVrNames = {
    "AE", "AS", "AT", "CS", "DA", "DS", "DT", "FD", "FL", "IS", "LO",
    "LT", "OB", "OD", "OF", "OL", "OW", "PN", "SH", "SL", "SQ", "SS",
    "ST", "TM", "UC", "UI", "UL", "UN", "UR", "US", "UT",
};

}  // namespace

std::string_view to_string(Vr vr) { return kVrNames[static_cast<std::size_t>(vr)]; }

std::optional<Vr> vr_from_code(char a, char b) {
    for (std::size_t i = 0; i < kVrNames.size(); ++i) {
        if (kVrNames[i][0] == a && kVrNames[i][1] == b) return static_cast<Vr>(i);
    }
    return std::nullopt;
}

bool has_long_length(Vr vr) {
    switch (vr) {
        case Vr::OB:
        case Vr::OD:
        case Vr::OF:
        case Vr::OL:
        case Vr::OW:
        case Vr::SQ:
        case Vr::UC:
        case Vr::UN:
        case Vr::UR:
        case Vr::UT:
            return true;
        default:
            return false;
    }
}

bool is_string_vr(Vr vr) {
    switch (vr) {
        case Vr::AE:
        case Vr::AS:
        case Vr::CS:
        case Vr::DA:
        case Vr::DS:
        case Vr::DT:
        case Vr::IS:
        case Vr::LO:
        case Vr::LT:
        case Vr::PN:
        case Vr::SH:
        case Vr::ST:
        case Vr::TM:
        case Vr::UC:
        case Vr::UI:
        case Vr::UR:
        case Vr::UT:
            return true;
        default:
            return false;
    }
}

std::string Tag::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "(%04X,%04X)", group, element);
    return buf;
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingMagic:
            return "MissingMagic";
        case ErrorCode::UnsupportedTransferSyntax:
            return "UnsupportedTransferSyntax";
        case ErrorCode::TruncatedElement:
            return "TruncatedElement";
        case ErrorCode::MalformedElement:
            return "MalformedElement";
        case ErrorCode::MissingRequiredTag:
            return "MissingRequiredTag";
        case ErrorCode::UnsupportedPixelFormat:
            return "UnsupportedPixelFormat";
        case ErrorCode::PixelDataMissing:
            return "PixelDataMissing";
        case ErrorCode::LengthMismatch:
            return "LengthMismatch";
    }
    return "Unknown";
}

DicomError::DicomError(ErrorCode code, const std::string& detail, std::optional<Tag> tag)
    : std::runtime_error(std::string(to_string(code)) + (tag ? " " + tag->to_string() : "") +
                         ": " + detail),
      code_(code),
      tag_(tag) {}

}  // namespace dicomrouter::dicom
