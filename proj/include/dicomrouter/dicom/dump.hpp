#pragma once

#include <string>

#include "dicomrouter/dicom/parser.hpp"

namespace dicomrouter::dicom {

/// One line: "GGGG,EEEE VR length value". Strings are bracketed with padding
/// stripped, binary numbers are decimal joined by '\', bulk data shows the
/// first 16 bytes as hex followed by "..." when longer.
std::string format_element(const DataElement& element);

/// File meta group followed by the body, one line per element.
std::string dump(const ParsedFile& file);

}  // namespace dicomrouter::dicom
