#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dicomrouter/dicom/tag.hpp"

namespace dicomrouter::dicom {

enum class ErrorCode {
    MissingMagic,
    UnsupportedTransferSyntax,
    TruncatedElement,
    MalformedElement,
    MissingRequiredTag,
    UnsupportedPixelFormat,
    PixelDataMissing,
    LengthMismatch,
};

std::string_view to_string(ErrorCode code);

class DicomError : public std::runtime_error {
public:
    DicomError(ErrorCode code, const std::string& detail, std::optional<Tag> tag = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<Tag> tag() const noexcept { return tag_; }

private:
    ErrorCode code_;
    std::optional<Tag> tag_;
};

}  // namespace dicomrouter::dicom
