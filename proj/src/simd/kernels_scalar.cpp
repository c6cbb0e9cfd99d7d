#include "dicomrouter/simd/kernels.hpp"
#include "kernels_internal.hpp"

#include <algorithm>
#include <cmath>

namespace dicomrouter::simd::detail {

namespace {

template <typename T>
void axpy(T a, const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
T dot(const T* x, const T* y, std::size_t n) {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

template <typename T>
T sum(const T* x, std::size_t n) {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

template <typename T>
void relu(T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
}

void lerp(const float* a, const float* b, float w, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + w * (b[i] - a[i]);
}

void rescale(const std::int32_t* raw, double slope, double intercept, double* out,
             std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(raw[i]) * slope + intercept;
}

void voi_linear(const double* in, double lower, double upper, double shifted_center,
                double inv_span, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double v = in[i];
        double r;
        if (v <= lower) {
            r = 0.0;
        } else if (v > upper) {
            r = 1.0;
        } else {
            r = (v - shifted_center) * inv_span + 0.5;
            r = std::min(std::max(r, 0.0), 1.0);
        }
        out[i] = static_cast<float>(r);
    }
}

void normalize(const double* in, double lo, double scale, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(std::min(std::max((in[i] - lo) * scale, 0.0), 1.0));
    }
}

void minmax(const double* x, std::size_t n, double* lo, double* hi) {
    double a = x[0];
    double b = x[0];
    for (std::size_t i = 1; i < n; ++i) {
        a = std::min(a, x[i]);
        b = std::max(b, x[i]);
    }
    *lo = a;
    *hi = b;
}

template <typename T>
void adam(T* param, const T* grad, T* m, T* v, std::size_t n, const AdamCoefficients& c) {
    const T b1 = static_cast<T>(c.beta1);
    const T b2 = static_cast<T>(c.beta2);
    const T one_minus_b1 = static_cast<T>(1.0 - c.beta1);
    const T one_minus_b2 = static_cast<T>(1.0 - c.beta2);
    const T inv_bc1 = static_cast<T>(1.0 / c.bias_correction1);
    const T inv_bc2 = static_cast<T>(1.0 / c.bias_correction2);
    const T lr = static_cast<T>(c.lr);
    const T eps = static_cast<T>(c.eps);
    for (std::size_t i = 0; i < n; ++i) {
        const T g = grad[i];
        m[i] = b1 * m[i] + one_minus_b1 * g;
        v[i] = b2 * v[i] + one_minus_b2 * (g * g);
        const T m_hat = m[i] * inv_bc1;
        const T v_hat = v[i] * inv_bc2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace

const KernelTable kScalarTable = {
    Isa::scalar,
    axpy<float>,
    axpy<double>,
    dot<float>,
    dot<double>,
    sum<float>,
    sum<double>,
    relu<float>,
    relu<double>,
    lerp,
    rescale,
    voi_linear,
    normalize,
    minmax,
    adam<float>,
    adam<double>,
};

}  // namespace dicomrouter::simd::detail
