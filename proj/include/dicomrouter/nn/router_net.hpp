#pragma once

// RouterNet-mu: the built-in classifier.
//
//   conv3x3(1->8)  + ReLU + maxpool2
//   conv3x3(8->16) + ReLU + maxpool2
//   conv3x3(16->32)+ ReLU + global average pool
//   dense 32->5
//
// Input is a batch of single-channel images of any size >= 4x4 (the router
// feeds 512x512). Parameters are templated so gradient checks can run in
// double precision; deployment uses float.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dicomrouter/nn/body_part.hpp"
#include "dicomrouter/nn/loss.hpp"
#include "dicomrouter/nn/tensor.hpp"

namespace dicomrouter::nn {

struct ArchitectureDescriptor {
    std::string name;
    std::vector<std::string> tensor_names;
    std::vector<std::vector<std::size_t>> tensor_shapes;

    std::size_t parameter_count() const;
};

/// Names and shapes RouterNet-mu expects, in file order.
const ArchitectureDescriptor& router_net_architecture();

inline constexpr std::size_t kMinInputSide = 4;

/// Throws ShapeMismatch naming the first offending tensor.
template <typename T>
void validate_router_net(const ModelParams<T>& params);

/// He-style uniform init: U(-sqrt(6/fan_in), sqrt(6/fan_in)); zero biases.
template <typename T>
ModelParams<T> init_router_net(std::uint64_t seed);

/// Logits for one H x W image.
template <typename T>
std::array<T, kNumClasses> forward_example(const ModelParams<T>& params, std::span<const T> image,
                                           std::size_t height, std::size_t width);

/// batch: [B, 1, H, W] -> logits [B, 5]. Throws ShapeMismatch.
template <typename T>
Tensor<T> forward(const ModelParams<T>& params, const Tensor<T>& batch);

template <typename T>
struct GradientResult {
    double loss = 0.0;
    ModelParams<T> grads;
};

/// One image of a batch, as a view.
template <typename T>
struct ImageView {
    std::span<const T> pixels;
    std::size_t height;
    std::size_t width;
};

/// Cross-entropy loss and its gradient with respect to every parameter.
template <typename T>
GradientResult<T> backward(const ModelParams<T>& params, std::span<const ImageView<T>> images,
                           std::span<const int> labels, Reduction reduction = Reduction::Mean);

/// Tensor-batch convenience overload.
template <typename T>
GradientResult<T> backward(const ModelParams<T>& params, const Tensor<T>& batch,
                           std::span<const int> labels, Reduction reduction = Reduction::Mean);

}  // namespace dicomrouter::nn
