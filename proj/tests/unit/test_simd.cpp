#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "dicomrouter/image/dicom_encode.hpp"
#include "dicomrouter/image/pipeline.hpp"
#include "dicomrouter/nn/router_net.hpp"
#include "dicomrouter/rng.hpp"
#include "dicomrouter/simd/kernels.hpp"

using namespace dicomrouter;
using namespace dicomrouter::simd;

namespace {

class SimdEquivalence : public ::testing::Test {
protected:
    void SetUp() override {
        avx = avx2_kernels();
        if (!avx) GTEST_SKIP() << "AVX2 variant not available on this machine";
    }
    void TearDown() override { select_isa(best_available_isa()); }

    const KernelTable& ref = scalar_kernels();
    const KernelTable* avx = nullptr;
    Xoshiro256ss rng{2024};

    template <typename T>
    std::vector<T> random_vec(std::size_t n, double lo = -3.0, double hi = 3.0) {
        std::vector<T> v(n);
        for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
        return v;
    }

    // Lengths straddling every vector width and remainder.
    static constexpr std::size_t kLengths[] = {0, 1, 3, 4, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 1023};
};

template <typename T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

}  // namespace

TEST_F(SimdEquivalence, ElementwiseKernelsAreBitwiseIdentical) {
    for (const std::size_t n : kLengths) {
        auto x32 = random_vec<float>(n);
        auto y32 = x32;
        ref.relu_f32(x32.data(), n);
        avx->relu_f32(y32.data(), n);
        EXPECT_TRUE(bitwise_equal(x32, y32)) << "relu_f32 n=" << n;

        auto x64 = random_vec<double>(n);
        auto y64 = x64;
        ref.relu_f64(x64.data(), n);
        avx->relu_f64(y64.data(), n);
        EXPECT_TRUE(bitwise_equal(x64, y64)) << "relu_f64 n=" << n;

        const auto a = random_vec<float>(n, 0, 1), b = random_vec<float>(n, 0, 1);
        std::vector<float> o1(n), o2(n);
        ref.lerp_f32(a.data(), b.data(), 0.37f, o1.data(), n);
        avx->lerp_f32(a.data(), b.data(), 0.37f, o2.data(), n);
        EXPECT_TRUE(bitwise_equal(o1, o2)) << "lerp n=" << n;

        std::vector<std::int32_t> raw(n);
        for (auto& r : raw) r = static_cast<std::int32_t>(rng.below(65536)) - 32768;
        std::vector<double> r1(n), r2(n);
        ref.rescale_i32(raw.data(), 0.5, -1024.0, r1.data(), n);
        avx->rescale_i32(raw.data(), 0.5, -1024.0, r2.data(), n);
        EXPECT_TRUE(bitwise_equal(r1, r2)) << "rescale n=" << n;

        std::vector<float> v1(n), v2(n);
        ref.voi_linear(r1.data(), -500.0, 500.0, 0.5, 1.0 / 1000.0, v1.data(), n);
        avx->voi_linear(r1.data(), -500.0, 500.0, 0.5, 1.0 / 1000.0, v2.data(), n);
        EXPECT_TRUE(bitwise_equal(v1, v2)) << "voi n=" << n;

        ref.normalize_f64(r1.data(), -17000.0, 1.0 / 34000.0, v1.data(), n);
        avx->normalize_f64(r1.data(), -17000.0, 1.0 / 34000.0, v2.data(), n);
        EXPECT_TRUE(bitwise_equal(v1, v2)) << "normalize n=" << n;

        if (n > 0) {
            double lo1, hi1, lo2, hi2;
            ref.minmax_f64(r1.data(), n, &lo1, &hi1);
            avx->minmax_f64(r1.data(), n, &lo2, &hi2);
            EXPECT_EQ(lo1, lo2);
            EXPECT_EQ(hi1, hi2);
        }
    }
}

TEST_F(SimdEquivalence, AdamMatchesScalar) {
    AdamCoefficients c;
    c.lr = 1e-3;
    c.bias_correction1 = 1 - 0.9 * 0.9;
    c.bias_correction2 = 1 - 0.999 * 0.999;
    for (const std::size_t n : kLengths) {
        const auto grad = random_vec<float>(n);
        auto p1 = random_vec<float>(n), m1 = random_vec<float>(n, -0.1, 0.1), v1 = random_vec<float>(n, 0, 0.1);
        auto p2 = p1, m2 = m1, v2 = v1;
        ref.adam_f32(p1.data(), grad.data(), m1.data(), v1.data(), n, c);
        avx->adam_f32(p2.data(), grad.data(), m2.data(), v2.data(), n, c);
        EXPECT_TRUE(bitwise_equal(m1, m2)) << n;
        EXPECT_TRUE(bitwise_equal(v1, v2)) << n;
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p1[i], p2[i], 1e-7f);

        const auto g64 = random_vec<double>(n);
        auto q1 = random_vec<double>(n), mm1 = random_vec<double>(n, -0.1, 0.1), vv1 = random_vec<double>(n, 0, 0.1);
        auto q2 = q1, mm2 = mm1, vv2 = vv1;
        ref.adam_f64(q1.data(), g64.data(), mm1.data(), vv1.data(), n, c);
        avx->adam_f64(q2.data(), g64.data(), mm2.data(), vv2.data(), n, c);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(q1[i], q2[i], 1e-15);
    }
}

TEST_F(SimdEquivalence, ReductionsAgreeToRounding) {
    for (const std::size_t n : kLengths) {
        const auto x = random_vec<double>(n), y = random_vec<double>(n);
        const double scale = static_cast<double>(n) + 1.0;
        EXPECT_NEAR(ref.dot_f64(x.data(), y.data(), n), avx->dot_f64(x.data(), y.data(), n), 1e-13 * scale);
        EXPECT_NEAR(ref.sum_f64(x.data(), n), avx->sum_f64(x.data(), n), 1e-13 * scale);

        const auto xf = random_vec<float>(n), yf = random_vec<float>(n);
        EXPECT_NEAR(ref.dot_f32(xf.data(), yf.data(), n), avx->dot_f32(xf.data(), yf.data(), n), 1e-5 * scale);
        EXPECT_NEAR(ref.sum_f32(xf.data(), n), avx->sum_f32(xf.data(), n), 1e-5 * scale);

        auto a1 = random_vec<double>(n);
        auto a2 = a1;
        ref.axpy_f64(0.3, x.data(), a1.data(), n);
        avx->axpy_f64(0.3, x.data(), a2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a1[i], a2[i], 1e-15);

        auto b1 = random_vec<float>(n);
        auto b2 = b1;
        ref.axpy_f32(0.3f, xf.data(), b1.data(), n);
        avx->axpy_f32(0.3f, xf.data(), b2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b1[i], b2[i], 1e-6f);
    }
}

TEST_F(SimdEquivalence, PipelineBitwiseAcrossIsas) {
    image::ImageTensor img(40, 30);
    for (auto& v : img.values) v = static_cast<float>(rng.uniform());
    const auto bytes = image::encode_as_dicom(img);
    select_isa(Isa::scalar);
    const auto a = image::preprocess(bytes, 128);
    select_isa(Isa::avx2);
    const auto b = image::preprocess(bytes, 128);
    EXPECT_TRUE(bitwise_equal(a.values, b.values));
}

TEST_F(SimdEquivalence, NetworkForwardAgrees) {
    const auto params = nn::init_router_net<float>(9);
    std::vector<float> image(64 * 64);
    for (auto& v : image) v = static_cast<float>(rng.uniform());
    select_isa(Isa::scalar);
    const auto a = nn::forward_example<float>(params, image, 64, 64);
    select_isa(Isa::avx2);
    const auto b = nn::forward_example<float>(params, image, 64, 64);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-4f * (1.0f + std::fabs(a[k])));
}

TEST(SimdDispatch, SelectAndReport) {
    select_isa(Isa::scalar);
    EXPECT_EQ(active_kernels().isa, Isa::scalar);
    EXPECT_EQ(to_string(Isa::scalar), "scalar");
    if (avx2_kernels()) {
        select_isa(Isa::avx2);
        EXPECT_EQ(active_kernels().isa, Isa::avx2);
    } else {
        EXPECT_THROW(select_isa(Isa::avx2), std::runtime_error);
    }
    select_isa(best_available_isa());
}
