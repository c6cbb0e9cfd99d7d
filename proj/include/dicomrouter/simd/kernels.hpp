#pragma once

// Data-parallel inner loops used by the image pipeline and the network.
//
// Every kernel has a portable scalar reference implementation and, on x86-64
// builds, an AVX2/FMA variant. The variant is chosen once at startup from
// CPUID and can be overridden with DICOMROUTER_SIMD=scalar|avx2 or
// select_isa(). Elementwise kernels are bitwise identical across variants;
// reductions and the FMA-based axpy agree to rounding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace dicomrouter::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct AdamCoefficients {
    double lr = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double bias_correction1 = 1.0;  // 1 - beta1^t
    double bias_correction2 = 1.0;  // 1 - beta2^t
};

struct KernelTable {
    Isa isa;

    // y += a * x
    void (*axpy_f32)(float a, const float* x, float* y, std::size_t n);
    void (*axpy_f64)(double a, const double* x, double* y, std::size_t n);

    float (*dot_f32)(const float* x, const float* y, std::size_t n);
    double (*dot_f64)(const double* x, const double* y, std::size_t n);

    float (*sum_f32)(const float* x, std::size_t n);
    double (*sum_f64)(const double* x, std::size_t n);

    // x = max(x, 0)
    void (*relu_f32)(float* x, std::size_t n);
    void (*relu_f64)(double* x, std::size_t n);

    // out = a + w * (b - a)
    void (*lerp_f32)(const float* a, const float* b, float w, float* out, std::size_t n);

    // out = raw * slope + intercept
    void (*rescale_i32)(const std::int32_t* raw, double slope, double intercept,
                        double* out, std::size_t n);

    // Linear VOI rule: 0 at or below `lower`, 1 above `upper`, otherwise
    // (v - shifted_center) * inv_span + 0.5.
    void (*voi_linear)(const double* in, double lower, double upper,
                       double shifted_center, double inv_span, float* out, std::size_t n);

    // out = (v - lo) * scale
    void (*normalize_f64)(const double* in, double lo, double scale, float* out, std::size_t n);

    void (*minmax_f64)(const double* x, std::size_t n, double* lo, double* hi);

    void (*adam_f32)(float* param, const float* grad, float* m, float* v, std::size_t n,
                     const AdamCoefficients& c);
    void (*adam_f64)(double* param, const double* grad, double* m, double* v, std::size_t n,
                     const AdamCoefficients& c);
};

const KernelTable& scalar_kernels();

/// AVX2 table, or nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

Isa best_available_isa();

/// Table used by the typed wrappers below.
const KernelTable& active_kernels();

/// Throws std::runtime_error when the requested ISA is unavailable.
void select_isa(Isa isa);

inline void axpy(float a, std::span<const float> x, std::span<float> y) {
    active_kernels().axpy_f32(a, x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active_kernels().axpy_f64(a, x.data(), y.data(), x.size());
}
inline float dot(std::span<const float> x, std::span<const float> y) {
    return active_kernels().dot_f32(x.data(), y.data(), x.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
    return active_kernels().dot_f64(x.data(), y.data(), x.size());
}
inline float sum(std::span<const float> x) {
    return active_kernels().sum_f32(x.data(), x.size());
}
inline double sum(std::span<const double> x) {
    return active_kernels().sum_f64(x.data(), x.size());
}
inline void relu(std::span<float> x) { active_kernels().relu_f32(x.data(), x.size()); }
inline void relu(std::span<double> x) { active_kernels().relu_f64(x.data(), x.size()); }

inline void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m,
                        std::span<float> v, const AdamCoefficients& c) {
    active_kernels().adam_f32(param.data(), grad.data(), m.data(), v.data(), param.size(), c);
}
inline void adam_update(std::span<double> param, std::span<const double> grad,
                        std::span<double> m, std::span<double> v, const AdamCoefficients& c) {
    active_kernels().adam_f64(param.data(), grad.data(), m.data(), v.data(), param.size(), c);
}

}  // namespace dicomrouter::simd
