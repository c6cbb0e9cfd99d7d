#include "dicomrouter/nn/router_net.hpp"

#include <cmath>
#include <sstream>

#include "dicomrouter/nn/layers.hpp"
#include "dicomrouter/rng.hpp"

namespace dicomrouter::nn {

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ',';
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::size_t ArchitectureDescriptor::parameter_count() const {
    std::size_t n = 0;
    for (const auto& s : tensor_shapes) n += element_count(s);
    return n;
}

const ArchitectureDescriptor& router_net_architecture() {
    static const ArchitectureDescriptor arch{
        "RouterNet-mu",
        {"conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias", "conv3.weight", "conv3.bias",
         "fc.weight", "fc.bias"},
        {{8, 1, 3, 3}, {8}, {16, 8, 3, 3}, {16}, {32, 16, 3, 3}, {32}, {kNumClasses, 32}, {kNumClasses}},
    };
    return arch;
}

template <typename T>
void validate_router_net(const ModelParams<T>& params) {
    const auto& arch = router_net_architecture();
    if (params.tensors.size() != arch.tensor_names.size()) {
        throw ShapeMismatch("expected " + std::to_string(arch.tensor_names.size()) +
                            " tensors, got " + std::to_string(params.tensors.size()));
    }
    for (std::size_t i = 0; i < arch.tensor_names.size(); ++i) {
        const auto& t = params.tensors[i];
        if (t.name != arch.tensor_names[i]) {
            throw ShapeMismatch("tensor " + std::to_string(i) + " is '" + t.name + "', expected '" +
                                arch.tensor_names[i] + "'");
        }
        if (t.tensor.shape != arch.tensor_shapes[i]) {
            throw ShapeMismatch(t.name + " has shape " + shape_string(t.tensor.shape) + ", expected " +
                                shape_string(arch.tensor_shapes[i]));
        }
        if (t.tensor.data.size() != element_count(t.tensor.shape)) {
            throw ShapeMismatch(t.name + " data length does not match its shape");
        }
    }
}

template <typename T>
ModelParams<T> init_router_net(std::uint64_t seed) {
    const auto& arch = router_net_architecture();
    Xoshiro256ss rng(seed);
    ModelParams<T> params;
    for (std::size_t i = 0; i < arch.tensor_names.size(); ++i) {
        Tensor<T> t(arch.tensor_shapes[i]);
        if (t.shape.size() > 1) {
            const std::size_t fan_in = element_count(t.shape) / t.shape[0];
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
            for (auto& w : t.data) w = static_cast<T>(rng.uniform(-bound, bound));
        }
        params.tensors.push_back({arch.tensor_names[i], std::move(t)});
    }
    return params;
}

namespace {

using layers::Shape3;

template <typename T>
struct Views {
    std::span<const T> c1w, c1b, c2w, c2b, c3w, c3b, fcw, fcb;

    explicit Views(const ModelParams<T>& p)
        : c1w(p.tensors[0].tensor.data), c1b(p.tensors[1].tensor.data),
          c2w(p.tensors[2].tensor.data), c2b(p.tensors[3].tensor.data),
          c3w(p.tensors[4].tensor.data), c3b(p.tensors[5].tensor.data),
          fcw(p.tensors[6].tensor.data), fcb(p.tensors[7].tensor.data) {}
};

template <typename T>
struct MutableViews {
    std::span<T> c1w, c1b, c2w, c2b, c3w, c3b, fcw, fcb;

    explicit MutableViews(ModelParams<T>& p)
        : c1w(p.tensors[0].tensor.data), c1b(p.tensors[1].tensor.data),
          c2w(p.tensors[2].tensor.data), c2b(p.tensors[3].tensor.data),
          c3w(p.tensors[4].tensor.data), c3b(p.tensors[5].tensor.data),
          fcw(p.tensors[6].tensor.data), fcb(p.tensors[7].tensor.data) {}
};

// Activations for one image, reused across a batch.
template <typename T>
struct Workspace {
    Shape3 s0, s1, q1, s2, q2, s3;
    std::vector<T> a1, p1, a2, p2, a3, g;
    std::vector<std::uint32_t> i1, i2;
    std::array<T, kNumClasses> logits{};

    // Backward scratch.
    std::vector<T> da1, dp1, da2, dp2, da3, dg;

    void resize(std::size_t h, std::size_t w) {
        if (h < kMinInputSide || w < kMinInputSide) {
            throw ShapeMismatch("input " + std::to_string(h) + "x" + std::to_string(w) +
                                " is smaller than the minimum 4x4");
        }
        s0 = {1, h, w};
        s1 = {8, h, w};
        q1 = layers::pooled(s1);
        s2 = {16, q1.height, q1.width};
        q2 = layers::pooled(s2);
        s3 = {32, q2.height, q2.width};
        a1.resize(s1.size());
        p1.resize(q1.size());
        i1.resize(q1.size());
        a2.resize(s2.size());
        p2.resize(q2.size());
        i2.resize(q2.size());
        a3.resize(s3.size());
        g.resize(32);
    }

    void forward(const Views<T>& v, std::span<const T> image) {
        layers::conv3x3_forward<T>(image, s0, v.c1w, v.c1b, 8, a1);
        layers::relu_forward<T>(a1);
        layers::maxpool2_forward<T>(a1, s1, p1, i1);
        layers::conv3x3_forward<T>(p1, q1, v.c2w, v.c2b, 16, a2);
        layers::relu_forward<T>(a2);
        layers::maxpool2_forward<T>(a2, s2, p2, i2);
        layers::conv3x3_forward<T>(p2, q2, v.c3w, v.c3b, 32, a3);
        layers::relu_forward<T>(a3);
        layers::global_avg_pool_forward<T>(a3, s3, g);
        layers::dense_forward<T>(g, v.fcw, v.fcb, logits);
        for (const T z : logits) {
            if (!std::isfinite(static_cast<double>(z))) throw NonFiniteInput("non-finite logit");
        }
    }

    void backward(const Views<T>& v, MutableViews<T>& d, std::span<const T> image,
                  std::span<const T> dlogits) {
        dg.assign(32, T(0));
        layers::dense_backward<T>(g, v.fcw, dlogits, d.fcw, d.fcb, dg);

        da3.assign(s3.size(), T(0));
        layers::global_avg_pool_backward<T>(dg, s3, da3);
        layers::relu_backward<T>(a3, da3);

        dp2.assign(q2.size(), T(0));
        layers::conv3x3_backward<T>(p2, q2, v.c3w, 32, da3, d.c3w, d.c3b, dp2);
        da2.assign(s2.size(), T(0));
        layers::maxpool2_backward<T>(dp2, i2, da2);
        layers::relu_backward<T>(a2, da2);

        dp1.assign(q1.size(), T(0));
        layers::conv3x3_backward<T>(p1, q1, v.c2w, 16, da2, d.c2w, d.c2b, dp1);
        da1.assign(s1.size(), T(0));
        layers::maxpool2_backward<T>(dp1, i1, da1);
        layers::relu_backward<T>(a1, da1);

        layers::conv3x3_backward<T>(image, s0, v.c1w, 8, da1, d.c1w, d.c1b, std::span<T>());
    }
};

template <typename T>
std::vector<ImageView<T>> split_batch(const Tensor<T>& batch) {
    if (batch.shape.size() != 4 || batch.shape[1] != 1) {
        throw ShapeMismatch("batch must be [B,1,H,W], got " + shape_string(batch.shape));
    }
    if (batch.data.size() != element_count(batch.shape)) {
        throw ShapeMismatch("batch data length does not match its shape");
    }
    const std::size_t h = batch.shape[2];
    const std::size_t w = batch.shape[3];
    std::vector<ImageView<T>> views;
    for (std::size_t b = 0; b < batch.shape[0]; ++b) {
        views.push_back({std::span<const T>(batch.data).subspan(b * h * w, h * w), h, w});
    }
    return views;
}

}  // namespace

template <typename T>
std::array<T, kNumClasses> forward_example(const ModelParams<T>& params, std::span<const T> image,
                                           std::size_t height, std::size_t width) {
    validate_router_net(params);
    if (image.size() != height * width) throw ShapeMismatch("image length does not match H x W");
    Workspace<T> ws;
    ws.resize(height, width);
    ws.forward(Views<T>(params), image);
    return ws.logits;
}

template <typename T>
Tensor<T> forward(const ModelParams<T>& params, const Tensor<T>& batch) {
    validate_router_net(params);
    const auto images = split_batch(batch);
    Tensor<T> out({images.size(), kNumClasses});
    if (images.empty()) return out;
    Workspace<T> ws;
    ws.resize(images[0].height, images[0].width);
    const Views<T> v(params);
    for (std::size_t b = 0; b < images.size(); ++b) {
        ws.forward(v, images[b].pixels);
        std::copy(ws.logits.begin(), ws.logits.end(), out.data.begin() + b * kNumClasses);
    }
    return out;
}

template <typename T>
GradientResult<T> backward(const ModelParams<T>& params, std::span<const ImageView<T>> images,
                           std::span<const int> labels, Reduction reduction) {
    validate_router_net(params);
    if (images.size() != labels.size()) throw ShapeMismatch("image and label counts differ");
    GradientResult<T> result;
    result.grads = params.zeros_like();
    if (images.empty()) return result;

    const Views<T> v(params);
    MutableViews<T> d(result.grads);
    Workspace<T> ws;
    std::size_t h = 0, w = 0;
    std::vector<double> logits(kNumClasses);
    std::array<T, kNumClasses> dlogits{};
    const double scale = reduction == Reduction::Mean ? 1.0 / static_cast<double>(images.size()) : 1.0;
    double total = 0.0;

    for (std::size_t b = 0; b < images.size(); ++b) {
        const auto& img = images[b];
        if (img.pixels.size() != img.height * img.width) {
            throw ShapeMismatch("image length does not match H x W");
        }
        if (img.height != h || img.width != w) {
            ws.resize(img.height, img.width);
            h = img.height;
            w = img.width;
        }
        ws.forward(v, img.pixels);
        std::copy(ws.logits.begin(), ws.logits.end(), logits.begin());
        const int label[1] = {labels[b]};
        const auto lg = cross_entropy_with_grad(logits, kNumClasses, label, Reduction::Sum);
        total += lg.loss;
        for (std::size_t k = 0; k < kNumClasses; ++k) dlogits[k] = static_cast<T>(lg.grad[k] * scale);
        ws.backward(v, d, img.pixels, dlogits);
    }
    result.loss = total * scale;
    return result;
}

template <typename T>
GradientResult<T> backward(const ModelParams<T>& params, const Tensor<T>& batch,
                           std::span<const int> labels, Reduction reduction) {
    const auto images = split_batch(batch);
    return backward<T>(params, std::span<const ImageView<T>>(images), labels, reduction);
}

#define DICOMROUTER_INSTANTIATE(T)                                                                \
    template void validate_router_net<T>(const ModelParams<T>&);                                  \
    template ModelParams<T> init_router_net<T>(std::uint64_t);                                    \
    template std::array<T, kNumClasses> forward_example<T>(const ModelParams<T>&,                 \
                                                           std::span<const T>, std::size_t,       \
                                                           std::size_t);                          \
    template Tensor<T> forward<T>(const ModelParams<T>&, const Tensor<T>&);                       \
    template GradientResult<T> backward<T>(const ModelParams<T>&,                                 \
                                           std::span<const ImageView<T>>, std::span<const int>,   \
                                           Reduction);                                            \
    template GradientResult<T> backward<T>(const ModelParams<T>&, const Tensor<T>&,               \
                                           std::span<const int>, Reduction);

DICOMROUTER_INSTANTIATE(float)
DICOMROUTER_INSTANTIATE(double)

#undef DICOMROUTER_INSTANTIATE

}  // namespace dicomrouter::nn
