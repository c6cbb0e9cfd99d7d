#include "dicomrouter/image/resize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dicomrouter/simd/kernels.hpp"

namespace dicomrouter::image {

namespace {

struct Tap {
    std::size_t i0;
    std::size_t i1;
    float w;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t d = 0; d < out; ++d) {
        double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
        if (src < 0.0) src = 0.0;
        auto i0 = static_cast<std::size_t>(std::floor(src));
        double w = src - static_cast<double>(i0);
        if (i0 >= in - 1) {
            i0 = in - 1;
            w = 0.0;
        }
        t[d] = Tap{i0, std::min(i0 + 1, in - 1), static_cast<float>(w)};
    }
    return t;
}

void horizontal(const float* row, const std::vector<Tap>& tx, float* out) {
    for (std::size_t x = 0; x < tx.size(); ++x) {
        const float a = row[tx[x].i0];
        const float b = row[tx[x].i1];
        out[x] = a + tx[x].w * (b - a);
    }
}

}  // namespace

ImageTensor resize_bilinear(const ImageTensor& img, std::size_t out_h, std::size_t out_w) {
    if (img.empty() || img.height == 0 || img.width == 0) {
        throw std::invalid_argument("resize_bilinear: empty image");
    }
    if (out_h == 0 || out_w == 0) throw std::invalid_argument("resize_bilinear: empty output size");

    const auto tx = taps(img.width, out_w);
    const auto ty = taps(img.height, out_h);
    ImageTensor out(out_h, out_w);

    // Two cached horizontally-resampled source rows; most output rows reuse them.
    std::vector<float> row_a(out_w), row_b(out_w);
    std::size_t cached_a = static_cast<std::size_t>(-1);
    std::size_t cached_b = static_cast<std::size_t>(-1);
    const auto& k = simd::active_kernels();
    for (std::size_t y = 0; y < out_h; ++y) {
        const Tap& t = ty[y];
        if (cached_a != t.i0) {
            if (cached_b == t.i0) {
                std::swap(row_a, row_b);
                std::swap(cached_a, cached_b);
            } else {
                horizontal(&img.values[t.i0 * img.width], tx, row_a.data());
                cached_a = t.i0;
            }
        }
        if (cached_b != t.i1) {
            horizontal(&img.values[t.i1 * img.width], tx, row_b.data());
            cached_b = t.i1;
        }
        k.lerp_f32(row_a.data(), row_b.data(), t.w, &out.values[y * out_w], out_w);
    }
    return out;
}

}  // namespace dicomrouter::image
