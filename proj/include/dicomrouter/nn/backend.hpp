#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "dicomrouter/image/image.hpp"
#include "dicomrouter/nn/body_part.hpp"
#include "dicomrouter/nn/tensor.hpp"

namespace dicomrouter::nn {

class BackendFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Logits = std::array<double, kNumClasses>;

struct Prediction {
    BodyPartClass cls = BodyPartClass::Others;
    Probabilities probabilities{};
    double latency_s = 0.0;  // forward pass only
};

/// A classifier the router can call. Implementations must be safe to call
/// concurrently.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string name() const = 0;

    /// Square side the backend expects its input resized to.
    virtual std::size_t input_size() const = 0;

    /// Softmax, argmax (lowest code on ties) and timing around logits().
    /// Any failure surfaces as BackendFailure.
    Prediction predict(const image::ImageTensor& image) const;

protected:
    virtual Logits logits(const image::ImageTensor& image) const = 0;
};

class RouterNetBackend final : public Backend {
public:
    /// Throws ShapeMismatch when params do not fit RouterNet-mu.
    RouterNetBackend(ModelParams<float> params, std::size_t input_size);

    std::string name() const override { return "routernet-mu"; }
    std::size_t input_size() const override { return input_size_; }
    const ModelParams<float>& params() const { return params_; }

protected:
    Logits logits(const image::ImageTensor& image) const override;

private:
    ModelParams<float> params_;
    std::size_t input_size_;
};

/// Backend from a plain function; used for external models and tests.
class CallbackBackend final : public Backend {
public:
    using Fn = std::function<Logits(const image::ImageTensor&)>;

    CallbackBackend(std::string name, std::size_t input_size, Fn fn)
        : name_(std::move(name)), input_size_(input_size), fn_(std::move(fn)) {}

    std::string name() const override { return name_; }
    std::size_t input_size() const override { return input_size_; }

protected:
    Logits logits(const image::ImageTensor& image) const override { return fn_(image); }

private:
    std::string name_;
    std::size_t input_size_;
    Fn fn_;
};

/// Probability vector and class for a logit vector.
Prediction classify_logits(const Logits& z);

}  // namespace dicomrouter::nn
