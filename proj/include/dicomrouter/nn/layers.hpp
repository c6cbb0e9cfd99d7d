#pragma once

// Per-example layer kernels on channel-major (C x H x W) buffers. Backward
// functions accumulate into their gradient outputs, so callers zero them
// once per batch. Row-level arithmetic goes through the SIMD kernel table.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dicomrouter/simd/kernels.hpp"

namespace dicomrouter::nn::layers {

struct Shape3 {
    std::size_t channels;
    std::size_t height;
    std::size_t width;

    std::size_t plane() const { return height * width; }
    std::size_t size() const { return channels * height * width; }
};

namespace detail {

// Valid output column range for horizontal offset dx in {-1,0,1}.
struct Span1 {
    std::size_t out_begin;
    std::size_t in_begin;
    std::size_t length;
};

inline Span1 column_span(std::size_t width, int dx) {
    if (dx < 0) return {1, 0, width - 1};
    if (dx > 0) return {0, 1, width - 1};
    return {0, 0, width};
}

}  // namespace detail

/// 3x3 convolution, stride 1, zero padding 1. weight: [cout][cin][3][3].
template <typename T>
void conv3x3_forward(std::span<const T> in, Shape3 s, std::span<const T> weight,
                     std::span<const T> bias, std::size_t cout, std::span<T> out) {
    const std::size_t plane = s.plane();
    for (std::size_t oc = 0; oc < cout; ++oc) {
        T* dst = out.data() + oc * plane;
        std::fill(dst, dst + plane, bias[oc]);
        for (std::size_t ic = 0; ic < s.channels; ++ic) {
            const T* src = in.data() + ic * plane;
            const T* w = weight.data() + (oc * s.channels + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const T wv = w[ky * 3 + kx];
                    const auto cols = detail::column_span(s.width, kx - 1);
                    if (cols.length == 0) continue;
                    for (std::size_t y = 0; y < s.height; ++y) {
                        const auto sy = static_cast<std::ptrdiff_t>(y) + ky - 1;
                        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(s.height)) continue;
                        simd::axpy(wv,
                                   std::span<const T>(src + sy * s.width + cols.in_begin, cols.length),
                                   std::span<T>(dst + y * s.width + cols.out_begin, cols.length));
                    }
                }
            }
        }
    }
}

/// Gradients of conv3x3_forward. `grad_in` may be empty when the input
/// gradient is not needed (first layer).
template <typename T>
void conv3x3_backward(std::span<const T> in, Shape3 s, std::span<const T> weight, std::size_t cout,
                      std::span<const T> grad_out, std::span<T> grad_weight,
                      std::span<T> grad_bias, std::span<T> grad_in) {
    const std::size_t plane = s.plane();
    for (std::size_t oc = 0; oc < cout; ++oc) {
        const T* g = grad_out.data() + oc * plane;
        grad_bias[oc] += simd::sum(std::span<const T>(g, plane));
        for (std::size_t ic = 0; ic < s.channels; ++ic) {
            const T* src = in.data() + ic * plane;
            const std::size_t wbase = (oc * s.channels + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const auto cols = detail::column_span(s.width, kx - 1);
                    if (cols.length == 0) continue;
                    const T wv = weight[wbase + ky * 3 + kx];
                    T acc = 0;
                    for (std::size_t y = 0; y < s.height; ++y) {
                        const auto sy = static_cast<std::ptrdiff_t>(y) + ky - 1;
                        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(s.height)) continue;
                        const std::span<const T> grow(g + y * s.width + cols.out_begin, cols.length);
                        acc += simd::dot(grow, std::span<const T>(src + sy * s.width + cols.in_begin,
                                                                  cols.length));
                        if (!grad_in.empty()) {
                            simd::axpy(wv, grow,
                                       std::span<T>(grad_in.data() + ic * plane + sy * s.width +
                                                        cols.in_begin,
                                                    cols.length));
                        }
                    }
                    grad_weight[wbase + ky * 3 + kx] += acc;
                }
            }
        }
    }
}

template <typename T>
void relu_forward(std::span<T> x) {
    simd::relu(x);
}

/// grad *= (activation > 0), using the post-activation values.
template <typename T>
void relu_backward(std::span<const T> activation, std::span<T> grad) {
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(activation[i] > T(0))) grad[i] = T(0);
    }
}

inline Shape3 pooled(Shape3 s) { return {s.channels, s.height / 2, s.width / 2}; }

/// 2x2 max pooling, stride 2; trailing odd row/column dropped. Records the
/// flat input index of each maximum (first in scan order on ties).
template <typename T>
void maxpool2_forward(std::span<const T> in, Shape3 s, std::span<T> out,
                      std::span<std::uint32_t> argmax) {
    const Shape3 o = pooled(s);
    for (std::size_t c = 0; c < s.channels; ++c) {
        for (std::size_t y = 0; y < o.height; ++y) {
            for (std::size_t x = 0; x < o.width; ++x) {
                const std::size_t base = c * s.plane() + (2 * y) * s.width + 2 * x;
                std::size_t best = base;
                for (const std::size_t idx : {base + 1, base + s.width, base + s.width + 1}) {
                    if (in[idx] > in[best]) best = idx;
                }
                const std::size_t oi = c * o.plane() + y * o.width + x;
                out[oi] = in[best];
                argmax[oi] = static_cast<std::uint32_t>(best);
            }
        }
    }
}

template <typename T>
void maxpool2_backward(std::span<const T> grad_out, std::span<const std::uint32_t> argmax,
                       std::span<T> grad_in) {
    for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in[argmax[i]] += grad_out[i];
}

/// Per-channel mean over H x W.
template <typename T>
void global_avg_pool_forward(std::span<const T> in, Shape3 s, std::span<T> out) {
    const T inv = T(1) / static_cast<T>(s.plane());
    for (std::size_t c = 0; c < s.channels; ++c) {
        out[c] = simd::sum(in.subspan(c * s.plane(), s.plane())) * inv;
    }
}

template <typename T>
void global_avg_pool_backward(std::span<const T> grad_out, Shape3 s, std::span<T> grad_in) {
    const T inv = T(1) / static_cast<T>(s.plane());
    for (std::size_t c = 0; c < s.channels; ++c) {
        const T g = grad_out[c] * inv;
        T* dst = grad_in.data() + c * s.plane();
        for (std::size_t i = 0; i < s.plane(); ++i) dst[i] += g;
    }
}

/// out = W x + b with W: [n_out][n_in].
template <typename T>
void dense_forward(std::span<const T> x, std::span<const T> weight, std::span<const T> bias,
                   std::span<T> out) {
    const std::size_t n_in = x.size();
    for (std::size_t o = 0; o < out.size(); ++o) {
        out[o] = bias[o] + simd::dot(weight.subspan(o * n_in, n_in), x);
    }
}

template <typename T>
void dense_backward(std::span<const T> x, std::span<const T> weight, std::span<const T> grad_out,
                    std::span<T> grad_weight, std::span<T> grad_bias, std::span<T> grad_x) {
    const std::size_t n_in = x.size();
    for (std::size_t o = 0; o < grad_out.size(); ++o) {
        const T g = grad_out[o];
        grad_bias[o] += g;
        simd::axpy(g, x, grad_weight.subspan(o * n_in, n_in));
        if (!grad_x.empty()) simd::axpy(g, weight.subspan(o * n_in, n_in), grad_x);
    }
}

}  // namespace dicomrouter::nn::layers
