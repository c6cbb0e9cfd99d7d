// Built with -mavx2 -mfma; only reached after a CPUID check.

#include "dicomrouter/simd/kernels.hpp"
#include "kernels_internal.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace dicomrouter::simd::detail {

namespace {

float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d high64 = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
}

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vy = _mm256_loadu_ps(y + i);
        vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy);
        _mm256_storeu_ps(y + i, vy);
    }
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpy_f64(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

float dot_f32(const float* x, const float* y, std::size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    }
    float acc = hsum(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
    return acc;
}

double dot_f64(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
    return acc;
}

float sum_f32(const float* x, std::size_t n) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
    float s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sum_f64(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

void relu_f32(float* x, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    for (; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_f64(double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void lerp_f32(const float* a, const float* b, float w, float* out, std::size_t n) {
    const __m256 vw = _mm256_set1_ps(w);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 diff = _mm256_sub_ps(_mm256_loadu_ps(b + i), va);
        _mm256_storeu_ps(out + i, _mm256_add_ps(va, _mm256_mul_ps(vw, diff)));
    }
    for (; i < n; ++i) out[i] = a[i] + w * (b[i] - a[i]);
}

void rescale_i32(const std::int32_t* raw, double slope, double intercept, double* out,
                 std::size_t n) {
    const __m256d vs = _mm256_set1_pd(slope);
    const __m256d vi = _mm256_set1_pd(intercept);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128i r = _mm_loadu_si128(reinterpret_cast<const __m128i*>(raw + i));
        const __m256d d = _mm256_cvtepi32_pd(r);
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(d, vs), vi));
    }
    for (; i < n; ++i) out[i] = static_cast<double>(raw[i]) * slope + intercept;
}

void voi_linear(const double* in, double lower, double upper, double shifted_center,
                double inv_span, float* out, std::size_t n) {
    const __m256d vlo = _mm256_set1_pd(lower);
    const __m256d vhi = _mm256_set1_pd(upper);
    const __m256d vc = _mm256_set1_pd(shifted_center);
    const __m256d vinv = _mm256_set1_pd(inv_span);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(in + i);
        __m256d r = _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(v, vc), vinv), half);
        r = _mm256_min_pd(_mm256_max_pd(r, zero), one);
        r = _mm256_blendv_pd(r, one, _mm256_cmp_pd(v, vhi, _CMP_GT_OQ));
        r = _mm256_blendv_pd(r, zero, _mm256_cmp_pd(v, vlo, _CMP_LE_OQ));
        _mm_storeu_ps(out + i, _mm256_cvtpd_ps(r));
    }
    for (; i < n; ++i) {
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

void normalize_f64(const double* in, double lo, double scale, float* out, std::size_t n) {
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vs = _mm256_set1_pd(scale);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(in + i), vlo), vs);
        r = _mm256_min_pd(_mm256_max_pd(r, zero), one);
        _mm_storeu_ps(out + i, _mm256_cvtpd_ps(r));
    }
    for (; i < n; ++i) {
        out[i] = static_cast<float>(std::min(std::max((in[i] - lo) * scale, 0.0), 1.0));
    }
}

void minmax_f64(const double* x, std::size_t n, double* lo, double* hi) {
    double a = x[0];
    double b = x[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vlo = _mm256_loadu_pd(x);
        __m256d vhi = vlo;
        for (i = 4; i + 4 <= n; i += 4) {
            const __m256d v = _mm256_loadu_pd(x + i);
            vlo = _mm256_min_pd(vlo, v);
            vhi = _mm256_max_pd(vhi, v);
        }
        alignas(32) double l[4];
        alignas(32) double h[4];
        _mm256_store_pd(l, vlo);
        _mm256_store_pd(h, vhi);
        a = std::min({l[0], l[1], l[2], l[3]});
        b = std::max({h[0], h[1], h[2], h[3]});
    }
    for (; i < n; ++i) {
        a = std::min(a, x[i]);
        b = std::max(b, x[i]);
    }
    *lo = a;
    *hi = b;
}

void adam_f32(float* param, const float* grad, float* m, float* v, std::size_t n,
              const AdamCoefficients& c) {
    const float b1 = static_cast<float>(c.beta1);
    const float b2 = static_cast<float>(c.beta2);
    const float omb1 = static_cast<float>(1.0 - c.beta1);
    const float omb2 = static_cast<float>(1.0 - c.beta2);
    const float ibc1 = static_cast<float>(1.0 / c.bias_correction1);
    const float ibc2 = static_cast<float>(1.0 / c.bias_correction2);
    const float lr = static_cast<float>(c.lr);
    const float eps = static_cast<float>(c.eps);
    const __m256 vb1 = _mm256_set1_ps(b1), vb2 = _mm256_set1_ps(b2);
    const __m256 vomb1 = _mm256_set1_ps(omb1), vomb2 = _mm256_set1_ps(omb2);
    const __m256 vibc1 = _mm256_set1_ps(ibc1), vibc2 = _mm256_set1_ps(ibc2);
    const __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 g = _mm256_loadu_ps(grad + i);
        const __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(vomb1, g));
        const __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                                        _mm256_mul_ps(vomb2, _mm256_mul_ps(g, g)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(vlr, _mm256_mul_ps(mi, vibc1)),
                                          _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vi, vibc2)), veps));
        _mm256_storeu_ps(param + i, _mm256_sub_ps(_mm256_loadu_ps(param + i), step));
    }
    for (; i < n; ++i) {
        const float g = grad[i];
        m[i] = b1 * m[i] + omb1 * g;
        v[i] = b2 * v[i] + omb2 * (g * g);
        param[i] -= lr * (m[i] * ibc1) / (std::sqrt(v[i] * ibc2) + eps);
    }
}

void adam_f64(double* param, const double* grad, double* m, double* v, std::size_t n,
              const AdamCoefficients& c) {
    const double b1 = c.beta1, b2 = c.beta2;
    const double omb1 = 1.0 - c.beta1, omb2 = 1.0 - c.beta2;
    const double ibc1 = 1.0 / c.bias_correction1, ibc2 = 1.0 / c.bias_correction2;
    const __m256d vb1 = _mm256_set1_pd(b1), vb2 = _mm256_set1_pd(b2);
    const __m256d vomb1 = _mm256_set1_pd(omb1), vomb2 = _mm256_set1_pd(omb2);
    const __m256d vibc1 = _mm256_set1_pd(ibc1), vibc2 = _mm256_set1_pd(ibc2);
    const __m256d vlr = _mm256_set1_pd(c.lr), veps = _mm256_set1_pd(c.eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        const __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vomb1, g));
        const __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(vomb2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, _mm256_mul_pd(mi, vibc1)),
                                           _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vi, vibc2)), veps));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
    }
    for (; i < n; ++i) {
        const double g = grad[i];
        m[i] = b1 * m[i] + omb1 * g;
        v[i] = b2 * v[i] + omb2 * (g * g);
        param[i] -= c.lr * (m[i] * ibc1) / (std::sqrt(v[i] * ibc2) + c.eps);
    }
}

}  // namespace

const KernelTable kAvx2Table = {
    Isa::avx2,
    axpy_f32,
    axpy_f64,
    dot_f32,
    dot_f64,
    sum_f32,
    sum_f64,
    relu_f32,
    relu_f64,
    lerp_f32,
    rescale_i32,
    voi_linear,
    normalize_f64,
    minmax_f64,
    adam_f32,
    adam_f64,
};

}  // namespace dicomrouter::simd::detail
