#pragma once

#include <cstdint>
#include <span>

#include "dicomrouter/dicom/dataset.hpp"

namespace dicomrouter::dicom {

struct ParsedFile {
    DataSet file_meta;
    DataSet dataset;
};

/// Parses a Part-10 file: 128-byte preamble, "DICM", the explicit-VR meta
/// group, then the body in the transfer syntax named by (0002,0010). Only
/// the two uncompressed little-endian syntaxes are accepted. Sequences are
/// skipped and recorded as empty SQ elements.
///
/// Throws DicomError.
ParsedFile parse_file(std::span<const std::uint8_t> bytes);

}  // namespace dicomrouter::dicom
