#pragma once

// Central finite-difference checks of every RouterNet-mu layer in double
// precision. Each layer is wrapped as L = sum(r * layer(x)) for a random
// upstream vector r, so the analytic side is the layer's backward pass fed
// with grad_out = r.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "dicomrouter/nn/layers.hpp"
#include "dicomrouter/nn/loss.hpp"
#include "dicomrouter/nn/router_net.hpp"
#include "dicomrouter/rng.hpp"

namespace testsupport {

inline constexpr double kGradStep = 1e-3;

struct GradCheckResult {
    std::string layer;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    // Entry with the largest error.
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t worst_index = 0;
};

inline double relative_error(double analytic, double numeric) {
    return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), 1e-7});
}

namespace detail {

using Vec = std::vector<double>;
using dicomrouter::Xoshiro256ss;
namespace layers = dicomrouter::nn::layers;

inline Vec random_vec(std::size_t n, Xoshiro256ss& rng, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline double weighted_sum(const Vec& r, const Vec& out) {
    return std::inner_product(r.begin(), r.end(), out.begin(), 0.0);
}

// Compares analytic gradient `grad` of `loss` with respect to `var` against
// central differences, accumulating into `result`.
inline double central_difference(Vec& var, std::size_t i, const std::function<double()>& loss, double step) {
    const double saved = var[i];
    var[i] = saved + step;
    const double up = loss();
    var[i] = saved - step;
    const double down = loss();
    var[i] = saved;
    return (up - down) / (2 * step);
}

inline void compare(Vec& var, const Vec& grad, const std::function<double()>& loss, GradCheckResult& result) {
    for (std::size_t i = 0; i < var.size(); ++i) {
        const double numeric = central_difference(var, i, loss, kGradStep);
        const double err = relative_error(grad[i], numeric);
        if (err > result.max_rel_error) {
            result.max_rel_error = err;
            result.worst_analytic = grad[i];
            result.worst_numeric = numeric;
            result.worst_index = result.checked;
        }
        ++result.checked;
    }
}

inline GradCheckResult check_conv(Xoshiro256ss& rng) {
    const layers::Shape3 s{3, 5, 6};
    const std::size_t cout = 4;
    Vec in = random_vec(s.size(), rng), w = random_vec(cout * s.channels * 9, rng), b = random_vec(cout, rng);
    const Vec r = random_vec(cout * s.plane(), rng);
    auto loss = [&] {
        Vec out(cout * s.plane());
        layers::conv3x3_forward<double>(in, s, w, b, cout, out);
        return weighted_sum(r, out);
    };
    Vec gin(in.size()), gw(w.size()), gb(b.size());
    layers::conv3x3_backward<double>(in, s, w, cout, r, gw, gb, gin);
    GradCheckResult res{"conv3x3"};
    compare(in, gin, loss, res);
    compare(w, gw, loss, res);
    compare(b, gb, loss, res);
    return res;
}

inline GradCheckResult check_relu(Xoshiro256ss& rng) {
    // Magnitudes kept clear of the kink by more than the step.
    Vec x(40);
    for (auto& v : x) v = rng.uniform(0.05, 1.0) * (rng.below(2) ? 1.0 : -1.0);
    const Vec r = random_vec(x.size(), rng);
    auto loss = [&] {
        Vec a = x;
        layers::relu_forward<double>(a);
        return weighted_sum(r, a);
    };
    Vec a = x;
    layers::relu_forward<double>(a);
    Vec g = r;
    layers::relu_backward<double>(a, g);
    GradCheckResult res{"relu"};
    compare(x, g, loss, res);
    return res;
}

inline GradCheckResult check_maxpool(Xoshiro256ss& rng) {
    const layers::Shape3 s{2, 6, 7};
    // Distinct values spaced well beyond 2h so no perturbation flips a max.
    Vec x(s.size());
    std::iota(x.begin(), x.end(), 0.0);
    std::span<double> xs(x);
    rng.shuffle(xs);
    for (auto& v : x) v *= 0.01;
    const auto o = layers::pooled(s);
    const Vec r = random_vec(o.size(), rng);
    std::vector<std::uint32_t> idx(o.size());
    auto loss = [&] {
        Vec out(o.size());
        layers::maxpool2_forward<double>(x, s, out, idx);
        return weighted_sum(r, out);
    };
    loss();
    Vec g(x.size(), 0.0);
    layers::maxpool2_backward<double>(r, idx, g);
    GradCheckResult res{"maxpool2"};
    compare(x, g, loss, res);
    return res;
}

inline GradCheckResult check_gap(Xoshiro256ss& rng) {
    const layers::Shape3 s{3, 4, 5};
    Vec x = random_vec(s.size(), rng);
    const Vec r = random_vec(s.channels, rng);
    auto loss = [&] {
        Vec out(s.channels);
        layers::global_avg_pool_forward<double>(x, s, out);
        return weighted_sum(r, out);
    };
    Vec g(x.size(), 0.0);
    layers::global_avg_pool_backward<double>(r, s, g);
    GradCheckResult res{"global_avg_pool"};
    compare(x, g, loss, res);
    return res;
}

inline GradCheckResult check_dense(Xoshiro256ss& rng) {
    const std::size_t n_in = 7, n_out = 5;
    Vec x = random_vec(n_in, rng), w = random_vec(n_out * n_in, rng), b = random_vec(n_out, rng);
    const Vec r = random_vec(n_out, rng);
    auto loss = [&] {
        Vec out(n_out);
        layers::dense_forward<double>(x, w, b, out);
        return weighted_sum(r, out);
    };
    Vec gx(n_in, 0.0), gw(w.size(), 0.0), gb(n_out, 0.0);
    layers::dense_backward<double>(x, w, r, gw, gb, gx);
    GradCheckResult res{"dense"};
    compare(x, gx, loss, res);
    compare(w, gw, loss, res);
    compare(b, gb, loss, res);
    return res;
}

inline GradCheckResult check_softmax_ce(Xoshiro256ss& rng) {
    const std::size_t batch = 3;
    Vec z = random_vec(batch * dicomrouter::nn::kNumClasses, rng, -3, 3);
    std::vector<int> labels(batch);
    for (auto& l : labels) l = static_cast<int>(rng.below(dicomrouter::nn::kNumClasses));
    auto loss = [&] { return dicomrouter::nn::cross_entropy_loss(z, dicomrouter::nn::kNumClasses, labels); };
    const auto lg = dicomrouter::nn::cross_entropy_with_grad(z, dicomrouter::nn::kNumClasses, labels);
    GradCheckResult res{"softmax_cross_entropy"};
    compare(z, lg.grad, loss, res);
    return res;
}

}  // namespace detail

/// One draw of every layer-level check.
inline std::vector<GradCheckResult> gradient_check_layers(std::uint64_t seed) {
    dicomrouter::Xoshiro256ss rng(seed);
    return {detail::check_conv(rng), detail::check_relu(rng), detail::check_maxpool(rng),
            detail::check_gap(rng), detail::check_dense(rng), detail::check_softmax_ce(rng)};
}

struct NetworkGradCheck {
    GradCheckResult coarse;      // every parameter at h = 1e-3
    std::size_t over_tolerance = 0;  // entries with relative error >= 1e-4 at h = 1e-3
    double refined_max_rel_error = 0.0;  // those entries again at h = 1e-6
};

/// Whole-network check: every parameter of RouterNet-mu (random non-zero
/// biases) on a batch of two 8x8 images, mean cross-entropy. A perturbation
/// of 1e-3 can carry a ReLU pre-activation or a pooling winner across its
/// switch point, where the loss is not differentiable; entries that miss
/// the tolerance are re-measured with a step small enough to stay on one
/// side.
inline NetworkGradCheck gradient_check_network(std::uint64_t seed) {
    using namespace dicomrouter::nn;
    dicomrouter::Xoshiro256ss rng(seed);
    auto params = init_router_net<double>(seed);
    for (auto& t : params.tensors) {
        if (t.tensor.shape.size() == 1) {
            for (auto& v : t.tensor.data) v = rng.uniform(-0.2, 0.2);
        }
    }
    const std::size_t side = 8;
    std::vector<std::vector<double>> pixels(2, std::vector<double>(side * side));
    for (auto& img : pixels) {
        for (auto& v : img) v = rng.uniform();
    }
    std::vector<ImageView<double>> views;
    for (const auto& img : pixels) views.push_back({img, side, side});
    const std::vector<int> labels = {static_cast<int>(rng.below(kNumClasses)),
                                     static_cast<int>(rng.below(kNumClasses))};

    const auto analytic = backward<double>(params, views, labels);
    auto loss = [&] { return backward<double>(params, views, labels).loss; };
    NetworkGradCheck out;
    out.coarse.layer = "routernet_mu";
    for (std::size_t t = 0; t < params.tensors.size(); ++t) {
        auto& data = params.tensors[t].tensor.data;
        const auto& grad = analytic.grads.tensors[t].tensor.data;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double numeric = detail::central_difference(data, i, loss, kGradStep);
            const double err = relative_error(grad[i], numeric);
            if (err > out.coarse.max_rel_error) {
                out.coarse.max_rel_error = err;
                out.coarse.worst_analytic = grad[i];
                out.coarse.worst_numeric = numeric;
                out.coarse.worst_index = out.coarse.checked;
            }
            ++out.coarse.checked;
            if (err >= 1e-4) {
                ++out.over_tolerance;
                const double fine = detail::central_difference(data, i, loss, 1e-6);
                out.refined_max_rel_error = std::max(out.refined_max_rel_error, relative_error(grad[i], fine));
            }
        }
    }
    return out;
}

}  // namespace testsupport
