#include "dictionary.hpp"

#include <algorithm>
#include <array>

namespace dicomrouter::dicom::detail {

namespace {

struct Entry {
    std::uint32_t tag;
    Vr vr;
};

// Sorted by tag.
constexpr std::array kEntries = {
    Entry{0x00080005, Vr::CS}, Entry{0x00080008, Vr::CS}, Entry{0x00080012, Vr::DA},
    Entry{0x00080013, Vr::TM}, Entry{0x00080016, Vr::UI}, Entry{0x00080018, Vr::UI},
    Entry{0x00080020, Vr::DA}, Entry{0x00080021, Vr::DA}, Entry{0x00080022, Vr::DA},
    Entry{0x00080023, Vr::DA}, Entry{0x00080030, Vr::TM}, Entry{0x00080031, Vr::TM},
    Entry{0x00080033, Vr::TM}, Entry{0x00080050, Vr::SH}, Entry{0x00080060, Vr::CS},
    Entry{0x00080064, Vr::CS}, Entry{0x00080068, Vr::CS}, Entry{0x00080070, Vr::LO},
    Entry{0x00080080, Vr::LO}, Entry{0x00080090, Vr::PN}, Entry{0x00080100, Vr::SH},
    Entry{0x00080102, Vr::SH}, Entry{0x00080104, Vr::LO}, Entry{0x00081010, Vr::SH},
    Entry{0x00081030, Vr::LO}, Entry{0x0008103E, Vr::LO}, Entry{0x00081040, Vr::LO},
    Entry{0x00081090, Vr::LO}, Entry{0x00081140, Vr::SQ}, Entry{0x00081150, Vr::UI},
    Entry{0x00081155, Vr::UI}, Entry{0x00082111, Vr::ST}, Entry{0x00100010, Vr::PN},
    Entry{0x00100020, Vr::LO}, Entry{0x00100030, Vr::DA}, Entry{0x00100040, Vr::CS},
    Entry{0x00101010, Vr::AS}, Entry{0x00180015, Vr::CS}, Entry{0x00180060, Vr::DS},
    Entry{0x00181000, Vr::LO}, Entry{0x00181020, Vr::LO}, Entry{0x00181150, Vr::IS},
    Entry{0x00181151, Vr::IS}, Entry{0x00181152, Vr::IS}, Entry{0x00181164, Vr::DS},
    Entry{0x00185101, Vr::CS}, Entry{0x0020000D, Vr::UI}, Entry{0x0020000E, Vr::UI},
    Entry{0x00200010, Vr::SH}, Entry{0x00200011, Vr::IS}, Entry{0x00200013, Vr::IS},
    Entry{0x00200020, Vr::CS}, Entry{0x00200062, Vr::CS}, Entry{0x00280002, Vr::US},
    Entry{0x00280004, Vr::CS}, Entry{0x00280010, Vr::US}, Entry{0x00280011, Vr::US},
    Entry{0x00280030, Vr::DS}, Entry{0x00280100, Vr::US}, Entry{0x00280101, Vr::US},
    Entry{0x00280102, Vr::US}, Entry{0x00280103, Vr::US}, Entry{0x00281040, Vr::CS},
    Entry{0x00281050, Vr::DS}, Entry{0x00281051, Vr::DS}, Entry{0x00281052, Vr::DS},
    Entry{0x00281053, Vr::DS}, Entry{0x00281054, Vr::LO}, Entry{0x00281055, Vr::LO},
    Entry{0x00281056, Vr::CS}, Entry{0x00282110, Vr::CS}, Entry{0x00282112, Vr::DS},
    Entry{0x00400275, Vr::SQ}, Entry{0x0040A170, Vr::SQ}, Entry{0x7FE00010, Vr::OW},
};

static_assert(std::is_sorted(kEntries.begin(), kEntries.end(),
                             [](const Entry& a, const Entry& b) { return a.tag < b.tag; }));

}  // namespace

Vr implicit_vr(Tag tag) {
    if (tag.element == 0x0000) return Vr::UL;
    const auto key = tag.combined();
    const auto it = std::lower_bound(kEntries.begin(), kEntries.end(), key,
                                     [](const Entry& e, std::uint32_t k) { return e.tag < k; });
    if (it != kEntries.end() && it->tag == key) return it->vr;
    return Vr::UN;
}

}  // namespace dicomrouter::dicom::detail
