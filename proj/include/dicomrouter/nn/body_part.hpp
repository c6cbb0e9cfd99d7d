#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace dicomrouter::nn {

enum class BodyPartClass : std::uint8_t {
    Abdominal = 0,
    AdultChest = 1,
    PediatricChest = 2,
    Spine = 3,
    Others = 4,
};

inline constexpr std::size_t kNumClasses = 5;

inline constexpr std::array<BodyPartClass, kNumClasses> kAllClasses = {
    BodyPartClass::Abdominal, BodyPartClass::AdultChest, BodyPartClass::PediatricChest,
    BodyPartClass::Spine, BodyPartClass::Others,
};

using Probabilities = std::array<double, kNumClasses>;

constexpr int code(BodyPartClass c) { return static_cast<int>(c); }

/// Snake-case identifier: "abdominal", "adult_chest", "pediatric_chest",
/// "spine", "others".
std::string_view to_string(BodyPartClass c);

/// Accepts the identifiers above or a class code "0".."4".
std::optional<BodyPartClass> parse_body_part(std::string_view text);

/// Throws std::out_of_range for codes outside 0..4.
BodyPartClass body_part_from_code(int code);

}  // namespace dicomrouter::nn
