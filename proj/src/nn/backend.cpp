#include "dicomrouter/nn/backend.hpp"

#include <chrono>

#include "dicomrouter/nn/loss.hpp"
#include "dicomrouter/nn/router_net.hpp"

namespace dicomrouter::nn {

Prediction classify_logits(const Logits& z) {
    Prediction p;
    const auto probs = softmax(z);
    std::copy(probs.begin(), probs.end(), p.probabilities.begin());
    p.cls = body_part_from_code(static_cast<int>(argmax(z)));
    return p;
}

Prediction Backend::predict(const image::ImageTensor& image) const {
    try {
        const auto start = std::chrono::steady_clock::now();
        const Logits z = logits(image);
        const auto stop = std::chrono::steady_clock::now();
        Prediction p = classify_logits(z);
        p.latency_s = std::chrono::duration<double>(stop - start).count();
        return p;
    } catch (const BackendFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw BackendFailure(name() + ": " + e.what());
    }
}

RouterNetBackend::RouterNetBackend(ModelParams<float> params, std::size_t input_size)
    : params_(std::move(params)), input_size_(input_size) {
    validate_router_net(params_);
    if (input_size_ < kMinInputSide) throw ShapeMismatch("input size below 4");
}

Logits RouterNetBackend::logits(const image::ImageTensor& image) const {
    if (image.height != input_size_ || image.width != input_size_) {
        throw BackendFailure("expected " + std::to_string(input_size_) + "x" +
                             std::to_string(input_size_) + " input, got " +
                             std::to_string(image.height) + "x" + std::to_string(image.width));
    }
    const auto z = forward_example<float>(params_, image.values, image.height, image.width);
    Logits out{};
    std::copy(z.begin(), z.end(), out.begin());
    return out;
}

}  // namespace dicomrouter::nn
