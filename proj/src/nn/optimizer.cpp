#include "dicomrouter/nn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dicomrouter/simd/kernels.hpp"

namespace dicomrouter::nn {

namespace {

template <typename T>
void require_same_layout(const ModelParams<T>& a, const ModelParams<T>& b, const char* what) {
    if (a.tensors.size() != b.tensors.size()) {
        throw ShapeMismatch(std::string(what) + ": tensor count differs");
    }
    for (std::size_t i = 0; i < a.tensors.size(); ++i) {
        if (a.tensors[i].tensor.shape != b.tensors[i].tensor.shape ||
            a.tensors[i].tensor.data.size() != b.tensors[i].tensor.data.size()) {
            throw ShapeMismatch(std::string(what) + ": " + a.tensors[i].name + " shape differs");
        }
    }
}

}  // namespace

template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, double lr) {
    require_same_layout(params, grads, "gradients");
    require_same_layout(params, state.m, "first moments");
    require_same_layout(params, state.v, "second moments");

    state.step += 1;
    simd::AdamCoefficients c;
    c.lr = lr;
    c.beta1 = state.beta1;
    c.beta2 = state.beta2;
    c.eps = state.eps;
    const double t = static_cast<double>(state.step);
    c.bias_correction1 = 1.0 - std::pow(state.beta1, t);
    c.bias_correction2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        simd::adam_update(std::span<T>(params.tensors[i].tensor.data),
                          std::span<const T>(grads.tensors[i].tensor.data),
                          std::span<T>(state.m.tensors[i].tensor.data),
                          std::span<T>(state.v.tensors[i].tensor.data), c);
    }
}

template void adam_step<float>(ModelParams<float>&, const ModelParams<float>&, AdamState<float>&,
                               double);
template void adam_step<double>(ModelParams<double>&, const ModelParams<double>&,
                                AdamState<double>&, double);

double cosine_annealing(double eta_max, double eta_min, double t_cur, double t_i) {
    return eta_min + 0.5 * (eta_max - eta_min) * (1.0 + std::cos(std::numbers::pi * t_cur / t_i));
}

double LrSchedule::lr_at(double epoch_progress) const {
    if (!(epoch_progress >= 0.0)) throw std::invalid_argument("epoch progress must be >= 0");
    if (!(t0 > 0.0) || !(t_mult >= 1.0)) throw std::invalid_argument("invalid restart period");
    double t_cur = epoch_progress;
    double t_i = t0;
    while (t_cur >= t_i) {
        t_cur -= t_i;
        t_i *= t_mult;
    }
    const double eta = cosine_annealing(eta_max, eta_min, t_cur, t_i);
    return std::min(std::max(eta, eta_min), eta_max);
}

}  // namespace dicomrouter::nn
