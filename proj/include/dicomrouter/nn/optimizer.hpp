#pragma once

#include <cstdint>

#include "dicomrouter/nn/tensor.hpp"

namespace dicomrouter::nn {

template <typename T>
struct AdamState {
    std::uint64_t step = 0;
    ModelParams<T> m;
    ModelParams<T> v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState fresh(const ModelParams<T>& params) {
        AdamState s;
        s.m = params.zeros_like();
        s.v = params.zeros_like();
        return s;
    }
};

/// One bias-corrected Adam update in place. Throws ShapeMismatch when
/// params, grads and state disagree.
template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, double lr);

/// Cosine annealing with warm restarts.
struct LrSchedule {
    double eta_max = 1e-4;
    double eta_min = 0.0;
    double t0 = 10.0;  // first period, epochs
    double t_mult = 2.0;

    /// Rate at fractional epoch `epoch_progress` >= 0.
    double lr_at(double epoch_progress) const;
};

/// eta_min + (eta_max - eta_min) * (1 + cos(pi * t_cur / t_i)) / 2
double cosine_annealing(double eta_max, double eta_min, double t_cur, double t_i);

}  // namespace dicomrouter::nn
