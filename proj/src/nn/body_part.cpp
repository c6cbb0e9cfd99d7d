#include "dicomrouter/nn/body_part.hpp"

#include <stdexcept>
#include <string>

namespace dicomrouter::nn {

namespace {
constexpr std::array<std::string_view, kNumClasses> kNames = {
    "abdominal", "adult_chest", "pediatric_chest", "spine", "others",
};
}

std::string_view to_string(BodyPartClass c) { return kNames[static_cast<std::size_t>(c)]; }

std::optional<BodyPartClass> parse_body_part(std::string_view text) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (text == kNames[i]) return static_cast<BodyPartClass>(i);
    }
    if (text.size() == 1 && text[0] >= '0' && text[0] <= '4') {
        return static_cast<BodyPartClass>(text[0] - '0');
    }
    return std::nullopt;
}

BodyPartClass body_part_from_code(int code) {
    if (code < 0 || code >= static_cast<int>(kNumClasses)) {
        throw std::out_of_range("class code " + std::to_string(code) + " outside 0..4");
    }
    return static_cast<BodyPartClass>(code);
}

}  // namespace dicomrouter::nn
