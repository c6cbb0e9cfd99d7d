#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dicomrouter::image {

/// Grayscale image with values in [0,1], row-major. The unit of
/// classification.
struct ImageTensor {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;

    ImageTensor() = default;
    ImageTensor(std::size_t h, std::size_t w, float fill = 0.0f)
        : height(h), width(w), values(h * w, fill) {}

    float& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
    float at(std::size_t r, std::size_t c) const { return values[r * width + c]; }

    bool empty() const { return values.empty(); }

    /// Finite, within [0,1], and sized height*width.
    bool is_valid() const;
};

/// Real-valued matrix between the modality and VOI stages.
struct DecimalMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
};

}  // namespace dicomrouter::image
