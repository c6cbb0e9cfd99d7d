#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dicomrouter::nn {

class ShapeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape);

/// Dense row-major tensor.
template <typename T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s, T fill = T(0))
        : shape(std::move(s)), data(element_count(shape), fill) {}

    std::size_t size() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
};

/// A parameter tensor with its layer-qualified name, e.g. "conv1.weight".
template <typename T>
struct NamedTensor {
    std::string name;
    Tensor<T> tensor;
};

/// Ordered named weights of a network.
template <typename T>
struct ModelParams {
    std::vector<NamedTensor<T>> tensors;

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.tensor.size();
        return n;
    }

    const Tensor<T>& at(std::string_view name) const {
        for (const auto& t : tensors) {
            if (t.name == name) return t.tensor;
        }
        throw std::out_of_range("no parameter tensor named '" + std::string(name) + "'");
    }
    Tensor<T>& at(std::string_view name) {
        return const_cast<Tensor<T>&>(std::as_const(*this).at(name));
    }

    /// Same names and shapes, all zeros.
    ModelParams zeros_like() const {
        ModelParams out;
        for (const auto& t : tensors) out.tensors.push_back({t.name, Tensor<T>(t.tensor.shape)});
        return out;
    }

    template <typename U>
    ModelParams<U> cast() const {
        ModelParams<U> out;
        for (const auto& t : tensors) {
            Tensor<U> c;
            c.shape = t.tensor.shape;
            c.data.assign(t.tensor.data.begin(), t.tensor.data.end());
            out.tensors.push_back({t.name, std::move(c)});
        }
        return out;
    }

    bool operator==(const ModelParams& other) const {
        if (tensors.size() != other.tensors.size()) return false;
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            if (tensors[i].name != other.tensors[i].name ||
                tensors[i].tensor.shape != other.tensors[i].tensor.shape ||
                tensors[i].tensor.data != other.tensors[i].tensor.data) {
                return false;
            }
        }
        return true;
    }
};

}  // namespace dicomrouter::nn
