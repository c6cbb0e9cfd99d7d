#pragma once

#include <optional>
#include <string_view>

namespace dicomrouter::dicom {

/// Value representations understood by the parser. Anything outside this set
/// is rejected as malformed.
enum class Vr {
    AE, AS, AT, CS, DA, DS, DT, FD, FL, IS, LO, LT, OB, OD, OF, OL, OW,
    PN, SH, SL, SQ, SS, ST, TM, UC, UI, UL, UN, UR, US, UT,
};

std::string_view to_string(Vr vr);

std::optional<Vr> vr_from_code(char a, char b);

/// Explicit VR encodings with a 2-byte reserved field and a 32-bit length.
bool has_long_length(Vr vr);

/// VRs whose value is a character string (padded to even length).
bool is_string_vr(Vr vr);

}  // namespace dicomrouter::dicom
