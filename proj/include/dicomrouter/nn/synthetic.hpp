#pragma once

// Procedural five-pattern dataset standing in for radiographs at desk
// scale. Patterns are defined on the unit square so the same example can be
// rendered at any resolution.
//
//   Abdominal      horizontal bars
//   AdultChest     vertical bars
//   PediatricChest centered disk
//   Spine          diagonal cross
//   Others         uniform noise

#include <cstdint>
#include <vector>

#include "dicomrouter/image/image.hpp"
#include "dicomrouter/nn/body_part.hpp"
#include "dicomrouter/rng.hpp"

namespace dicomrouter::nn {

struct LabeledExample {
    image::ImageTensor image;
    BodyPartClass label;
};

/// Render one jittered pattern. Values are in [0,1].
image::ImageTensor render_pattern(BodyPartClass cls, std::size_t size, Xoshiro256ss& rng);

/// n_per_class examples of each class, interleaved (example j has class
/// j % 5). Example j draws its jitter from stream (seed, j). Throws
/// std::invalid_argument when n_per_class or image_size is zero.
std::vector<LabeledExample> make_synthetic_dataset(std::size_t n_per_class, std::size_t image_size,
                                                   std::uint64_t seed);

}  // namespace dicomrouter::nn
