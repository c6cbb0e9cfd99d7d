#pragma once

#include "dicomrouter/dicom/tag.hpp"
#include "dicomrouter/dicom/vr.hpp"

namespace dicomrouter::dicom::detail {

/// VR lookup for implicit-VR bodies. Group lengths map to UL, pixel data to
/// OW, unknown and private tags to UN.
Vr implicit_vr(Tag tag);

}  // namespace dicomrouter::dicom::detail
