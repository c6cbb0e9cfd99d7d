#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "dicomrouter/nn/backend.hpp"
#include "dicomrouter/nn/body_part.hpp"
#include "dicomrouter/nn/loss.hpp"
#include "dicomrouter/nn/optimizer.hpp"
#include "dicomrouter/nn/router_net.hpp"
#include "dicomrouter/nn/synthetic.hpp"
#include "dicomrouter/nn/trainer.hpp"
#include "dicomrouter/nn/weights_io.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace dicomrouter;
using namespace dicomrouter::nn;

namespace {

std::vector<double> logits_of(std::initializer_list<double> z) { return z; }

Tensor<float> batch_of(const std::vector<LabeledExample>& examples) {
    const auto& first = examples.front().image;
    Tensor<float> t({examples.size(), 1, first.height, first.width});
    for (std::size_t b = 0; b < examples.size(); ++b) {
        std::copy(examples[b].image.values.begin(), examples[b].image.values.end(),
                  t.data.begin() + static_cast<std::ptrdiff_t>(b * first.values.size()));
    }
    return t;
}

std::vector<int> labels_of(const std::vector<LabeledExample>& examples) {
    std::vector<int> out;
    for (const auto& e : examples) out.push_back(code(e.label));
    return out;
}

double l2(const image::ImageTensor& a, const image::ImageTensor& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::pow(a.values[i] - b.values[i], 2);
    return std::sqrt(s);
}

}  // namespace

TEST(BodyPart, CodesAndNames) {
    EXPECT_EQ(code(BodyPartClass::PediatricChest), 2);
    EXPECT_EQ(to_string(BodyPartClass::AdultChest), "adult_chest");
    EXPECT_EQ(parse_body_part("spine"), BodyPartClass::Spine);
    EXPECT_EQ(parse_body_part("4"), BodyPartClass::Others);
    EXPECT_FALSE(parse_body_part("5").has_value());
    EXPECT_FALSE(parse_body_part("head").has_value());
    EXPECT_THROW(body_part_from_code(-1), std::out_of_range);
}

TEST(Softmax, UniformAndOneHot) {
    for (const double p : softmax(logits_of({0, 0, 0, 0, 0}))) EXPECT_DOUBLE_EQ(p, 0.2);
    const auto p = softmax(logits_of({1, 0, 0, 0, 0}));
    // e/(e+4) and 1/(e+4), evaluated to 30 digits with mpmath.
    EXPECT_NEAR(p[0], 0.4046096751916897, 1e-15);
    for (std::size_t k = 1; k < 5; ++k) EXPECT_NEAR(p[k], 0.1488475812020776, 1e-15);
}

TEST(Softmax, ShiftInvariance) {
    Xoshiro256ss rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(5);
        for (auto& v : z) v = rng.uniform(-20, 20);
        auto shifted = z;
        const double c = rng.uniform(-500, 500);
        for (auto& v : shifted) v += c;
        const auto a = softmax(z), b = softmax(shifted);
        for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
    }
}

// Property: sums to one, strictly positive, argmax preserved, for extreme
// magnitudes.
TEST(Softmax, StabilityProperty) {
    Xoshiro256ss rng(2);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> z(5);
        const double mag = std::pow(10.0, rng.uniform(-2, 4));
        for (auto& v : z) v = rng.uniform(-mag, mag);
        const auto p = softmax(z);
        double sum = 0;
        for (const double v : p) {
            ASSERT_TRUE(std::isfinite(v));
            sum += v;
        }
        ASSERT_NEAR(sum, 1.0, 1e-9);
        ASSERT_EQ(argmax(p), argmax(z));
        // Strict positivity holds unless a gap exceeds the double range of exp.
        const double zmax = *std::max_element(z.begin(), z.end());
        for (std::size_t k = 0; k < 5; ++k) {
            if (zmax - z[k] < 700) {
                ASSERT_GT(p[k], 0.0);
            }
        }
    }
}

TEST(Softmax, StrictlyPositiveUpTo1e4WithClamping) {
    // Magnitudes up to 1e4 in both directions; with |gap| <= 700 every
    // probability is representable and strictly positive.
    Xoshiro256ss rng(3);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> z(5);
        const double base = rng.uniform(-1e4, 1e4);
        for (auto& v : z) v = base + rng.uniform(-300, 300);
        for (const double v : softmax(z)) ASSERT_GT(v, 0.0);
    }
}

TEST(CrossEntropy, Examples) {
    const int label0[] = {0};
    EXPECT_LT(cross_entropy_loss(logits_of({1000, 0, 0, 0, 0}), 5, label0), 1e-6);
    EXPECT_NEAR(cross_entropy_loss(logits_of({0, 0, 0, 0, 0}), 5, label0), 1.6094379124341003, 1e-15);
    const auto one = logits_of({0.3, -1.2, 2.0, 0.1, 0.7});
    auto two = one;
    two.insert(two.end(), one.begin(), one.end());
    const int l1[] = {2};
    const int l2v[] = {2, 2};
    EXPECT_EQ(cross_entropy_loss(two, 5, l2v, Reduction::Sum), 2 * cross_entropy_loss(one, 5, l1, Reduction::Sum));
    EXPECT_DOUBLE_EQ(cross_entropy_loss(two, 5, l2v, Reduction::Mean), cross_entropy_loss(one, 5, l1));
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHot) {
    const auto z = logits_of({0.3, -1.2, 2.0, 0.1, 0.7});
    const int label[] = {3};
    const auto lg = cross_entropy_with_grad(z, 5, label);
    const auto p = softmax(z);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(lg.grad[k], p[k] - (k == 3 ? 1.0 : 0.0), 1e-15);
}

TEST(CrossEntropy, Errors) {
    const int bad[] = {5};
    EXPECT_THROW(cross_entropy_loss(logits_of({0, 0, 0, 0, 0}), 5, bad), LabelOutOfRange);
    const int ok[] = {0};
    EXPECT_THROW(cross_entropy_loss(logits_of({NAN, 0, 0, 0, 0}), 5, ok), NonFiniteInput);
}

TEST(Argmax, LowestIndexOnTies) {
    EXPECT_EQ(argmax(logits_of({1, 3, 3, 0, 3})), 1u);
    EXPECT_EQ(argmax(logits_of({0, 0, 0, 0, 0})), 0u);
}

TEST(RouterNet, ArchitectureAndParameterCount) {
    const auto& arch = router_net_architecture();
    // 8*9+8 + 16*8*9+16 + 32*16*9+32 + 5*32+5
    EXPECT_EQ(arch.parameter_count(), 80u + 1168u + 4640u + 165u);
    EXPECT_EQ(init_router_net<float>(0).parameter_count(), 6053u);
}

TEST(RouterNet, ZeroWeightsGiveUniform) {
    auto params = init_router_net<float>(0).zeros_like();
    Tensor<float> batch({2, 1, 16, 16}, 0.5f);
    const auto out = forward(params, batch);
    ASSERT_EQ(out.shape, (std::vector<std::size_t>{2, 5}));
    for (const float v : out.data) EXPECT_EQ(v, 0.0f);
    Logits z{};
    for (const double p : classify_logits(z).probabilities) EXPECT_DOUBLE_EQ(p, 0.2);
}

TEST(RouterNet, OutputShapeAndDeterminism) {
    const auto params = init_router_net<float>(42);
    const auto data = make_synthetic_dataset(1, 20, 4);
    const auto batch = batch_of(data);
    const auto a = forward(params, batch);
    const auto b = forward(params, init_router_net<float>(42) == params ? batch : batch);
    EXPECT_EQ(a.shape, (std::vector<std::size_t>{5, 5}));
    EXPECT_EQ(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)), 0);
    EXPECT_TRUE(init_router_net<float>(42) == params);
    EXPECT_FALSE(init_router_net<float>(43) == params);
}

TEST(RouterNet, ShapeErrors) {
    auto params = init_router_net<float>(0);
    EXPECT_THROW(forward(params, Tensor<float>({1, 1, 3, 8})), ShapeMismatch);
    EXPECT_THROW(forward(params, Tensor<float>({1, 2, 8, 8})), ShapeMismatch);
    params.tensors[6].tensor = Tensor<float>({6, 32});
    try {
        forward(params, Tensor<float>({1, 1, 8, 8}));
        FAIL();
    } catch (const ShapeMismatch& e) {
        EXPECT_NE(std::string(e.what()).find("fc.weight"), std::string::npos);
    }
}

TEST(RouterNet, DuplicatedExampleHasSameMeanGradient) {
    const auto params = init_router_net<double>(5);
    std::vector<double> img(12 * 12);
    Xoshiro256ss rng(6);
    for (auto& v : img) v = rng.uniform();
    const ImageView<double> view{img, 12, 12};
    const std::vector<ImageView<double>> one{view}, two{view, view};
    const int l1[] = {1};
    const int l2v[] = {1, 1};
    const auto g1 = backward<double>(params, one, l1);
    const auto g2 = backward<double>(params, two, l2v);
    EXPECT_NEAR(g1.loss, g2.loss, 1e-15);
    for (std::size_t t = 0; t < g1.grads.tensors.size(); ++t) {
        for (std::size_t i = 0; i < g1.grads.tensors[t].tensor.data.size(); ++i) {
            EXPECT_NEAR(g1.grads.tensors[t].tensor.data[i], g2.grads.tensors[t].tensor.data[i], 1e-15);
        }
    }
}

TEST(RouterNet, HeadGradientIsSigmaMinusOne) {
    // With everything but fc.bias zero, the logits equal fc.bias, so
    // dL/db_y = softmax(b)_y - 1.
    auto params = init_router_net<double>(0).zeros_like();
    auto& bias = params.at("fc.bias").data;
    bias = {0.5, -0.3, 1.2, 0.0, -1.0};
    std::vector<double> img(8 * 8, 0.3);
    const std::vector<ImageView<double>> views{{img, 8, 8}};
    const int label[] = {2};
    const auto g = backward<double>(params, views, label);
    const auto p = softmax(bias);
    EXPECT_NEAR(g.grads.at("fc.bias").data[2], p[2] - 1.0, 1e-15);
    EXPECT_NEAR(g.grads.at("fc.bias").data[0], p[0], 1e-15);
}

TEST(GradientCheck, EveryLayerThreeDraws) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        for (const auto& r : testsupport::gradient_check_layers(seed)) {
            EXPECT_LT(r.max_rel_error, 1e-4) << r.layer << " seed " << seed;
            EXPECT_GT(r.checked, 0u);
        }
    }
}

TEST(GradientCheck, WholeNetwork) {
    const auto r = testsupport::gradient_check_network(11);
    EXPECT_EQ(r.coarse.checked, 6053u);
    // Almost every entry passes at h = 1e-3; the rest straddle a ReLU or
    // pooling switch and agree once the step stays on one side of it.
    EXPECT_LE(r.over_tolerance, r.coarse.checked / 100) << "worst entry " << r.coarse.worst_index << ": analytic "
                                                        << r.coarse.worst_analytic << " numeric "
                                                        << r.coarse.worst_numeric;
    EXPECT_LT(r.refined_max_rel_error, 1e-4);
}

TEST(Adam, ZeroGradientLeavesParams) {
    auto params = init_router_net<float>(1);
    const auto before = params;
    auto state = AdamState<float>::fresh(params);
    adam_step(params, params.zeros_like(), state, 1e-3);
    EXPECT_TRUE(params == before);
    EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroLearningRateLeavesParams) {
    auto params = init_router_net<float>(1);
    const auto before = params;
    auto grads = params;
    auto state = AdamState<float>::fresh(params);
    adam_step(params, grads, state, 0.0);
    EXPECT_TRUE(params == before);
}

TEST(Adam, FirstStepIsLrTimesSign) {
    ModelParams<double> p;
    p.tensors.push_back({"w", Tensor<double>({3})});
    auto g = p.zeros_like();
    g.tensors[0].tensor.data = {1.0, -250.0, 1e-3};
    auto state = AdamState<double>::fresh(p);
    adam_step(p, g, state, 0.1);
    // m_hat = g, v_hat = g^2: step = -lr * g / (|g| + eps)
    EXPECT_NEAR(p.tensors[0].tensor.data[0], -0.1 / (1 + 1e-8), 1e-15);
    EXPECT_NEAR(p.tensors[0].tensor.data[1], 0.1 * 250 / (250 + 1e-8), 1e-15);
    EXPECT_NEAR(p.tensors[0].tensor.data[2], -0.1 * 1e-3 / (1e-3 + 1e-8), 1e-12);
}

TEST(Adam, ShapeMismatch) {
    auto params = init_router_net<float>(1);
    auto state = AdamState<float>::fresh(params);
    ModelParams<float> wrong;
    EXPECT_THROW(adam_step(params, wrong, state, 1e-3), ShapeMismatch);
}

// Property: a small step on a fixed batch does not increase that batch's
// loss in at least 95 of 100 trials.
TEST(Adam, SmallStepDescends) {
    const auto data = make_synthetic_dataset(2, 16, 3);
    std::vector<ImageView<float>> views;
    for (const auto& e : data) views.push_back({e.image.values, 16, 16});
    const auto labels = labels_of(data);
    int ok = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        auto params = init_router_net<float>(trial);
        const auto g = backward<float>(params, views, labels);
        auto state = AdamState<float>::fresh(params);
        adam_step(params, g.grads, state, 1e-5);
        if (backward<float>(params, views, labels).loss <= g.loss) ++ok;
    }
    EXPECT_GE(ok, 95);
}

TEST(Schedule, CosineWithWarmRestarts) {
    const LrSchedule s;  // eta_max 1e-4, eta_min 0, T0 10, Tmult 2
    EXPECT_DOUBLE_EQ(s.lr_at(0), 1e-4);
    EXPECT_NEAR(s.lr_at(5), 0.5e-4, 1e-18);
    EXPECT_NEAR(s.lr_at(10 - 1e-12), 0.0, 1e-16);
    EXPECT_DOUBLE_EQ(s.lr_at(10), 1e-4);  // restart
    EXPECT_NEAR(s.lr_at(20), 0.5e-4, 1e-18);  // middle of the 20-epoch period
    EXPECT_DOUBLE_EQ(s.lr_at(30), 1e-4);
    EXPECT_DOUBLE_EQ(cosine_annealing(1e-4, 0, 0, 10), 1e-4);
    EXPECT_NEAR(cosine_annealing(1e-4, 0, 10, 10), 0.0, 1e-20);
    EXPECT_DOUBLE_EQ(cosine_annealing(3, 1, 5, 10), 2.0);
    for (double t = 0; t < 70; t += 0.37) {
        EXPECT_GE(s.lr_at(t), s.eta_min);
        EXPECT_LE(s.lr_at(t), s.eta_max);
    }
}

TEST(Synthetic, CountsAndDeterminism) {
    const auto a = make_synthetic_dataset(10, 24, 9);
    ASSERT_EQ(a.size(), 50u);
    std::array<int, 5> counts{};
    for (const auto& e : a) {
        ++counts[static_cast<std::size_t>(code(e.label))];
        EXPECT_TRUE(e.image.is_valid());
        EXPECT_EQ(e.image.height, 24u);
    }
    for (const int c : counts) EXPECT_EQ(c, 10);
    const auto b = make_synthetic_dataset(10, 24, 9);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].image.values, b[i].image.values);
    EXPECT_NE(make_synthetic_dataset(10, 24, 10)[0].image.values, a[0].image.values);
    EXPECT_THROW(make_synthetic_dataset(0, 24, 1), std::invalid_argument);
}

TEST(Synthetic, ClassesAreSeparable) {
    const auto data = make_synthetic_dataset(30, 32, 21);
    std::array<image::ImageTensor, 5> mean;
    for (auto& m : mean) m = image::ImageTensor(32, 32);
    for (const auto& e : data) {
        auto& m = mean[static_cast<std::size_t>(code(e.label))];
        for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] += e.image.values[i] / 30.0f;
    }
    double inter = 0, intra = 0;
    int n_inter = 0, n_intra = 0;
    for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t b = a + 1; b < 5; ++b) {
            inter += l2(mean[a], mean[b]);
            ++n_inter;
        }
    }
    for (const auto& e : data) {
        intra += l2(e.image, mean[static_cast<std::size_t>(code(e.label))]);
        ++n_intra;
    }
    EXPECT_GT(inter / n_inter, 5.0 * intra / n_intra);
}

TEST(Trainer, DeterministicAndBookkeeping) {
    const auto train_set = make_synthetic_dataset(4, 16, 1);
    const auto val_set = make_synthetic_dataset(2, 16, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 6;
    cfg.seed = 7;
    const auto a = train(train_set, val_set, cfg);
    const auto b = train(train_set, val_set, cfg);
    EXPECT_EQ(a.history, b.history);
    EXPECT_TRUE(a.params == b.params);
    ASSERT_EQ(a.history.size(), 3u);
    // 20 examples at batch 6: 4 steps per epoch.
    EXPECT_EQ(a.history[0].steps, 4u);
    EXPECT_EQ(a.optimizer_steps, 12u);

    cfg.epochs = 1;
    cfg.batch_size = train_set.size();
    EXPECT_EQ(train(train_set, val_set, cfg).optimizer_steps, 1u);
}

TEST(Trainer, BestCheckpointRule) {
    const auto train_set = make_synthetic_dataset(4, 16, 1);
    const auto val_set = make_synthetic_dataset(2, 16, 2);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.seed = 3;
    const auto r = train(train_set, val_set, cfg);
    for (const auto& e : r.history) {
        EXPECT_LE(e.val_accuracy, r.best_val_accuracy);
        if (e.val_accuracy == r.best_val_accuracy) {
            EXPECT_GE(e.val_loss, r.best_val_loss);
        }
    }
    EXPECT_NEAR(evaluate(r.params, val_set).accuracy, r.best_val_accuracy, 1e-12);
}

TEST(Trainer, EmptyDatasetRejected) {
    const auto val_set = make_synthetic_dataset(1, 16, 2);
    EXPECT_THROW(train({}, val_set, TrainConfig{}), EmptyDataset);
}

TEST(Weights, RoundTripBitwise) {
    const auto params = init_router_net<float>(17);
    const auto bytes = save_weights(params);
    EXPECT_TRUE(load_weights(bytes) == params);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RNMW");
}

TEST(Weights, Errors) {
    const auto bytes = save_weights(init_router_net<float>(17));
    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 10);
    EXPECT_THROW(load_weights(truncated), TruncatedWeights);
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(load_weights(bad), BadMagic);
    auto version = bytes;
    version[4] = 9;
    EXPECT_THROW(load_weights(version), VersionUnsupported);
    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(load_weights(trailing), WeightsError);

    auto six = init_router_net<float>(17);
    six.at("fc.weight") = Tensor<float>({6, 32});
    six.at("fc.bias") = Tensor<float>({6});
    const auto six_bytes = save_weights(six);
    EXPECT_THROW(load_weights(six_bytes), ShapeMismatchWithArchitecture);
    EXPECT_NO_THROW(load_weights_unchecked(six_bytes));
}

TEST(Backend, TieBreakAndShiftInvariance) {
    Logits z{};
    const auto p = classify_logits(z);
    EXPECT_EQ(p.cls, BodyPartClass::Abdominal);
    Xoshiro256ss rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        Logits a;
        for (auto& v : a) v = rng.uniform(-5, 5);
        Logits b = a;
        const double c = rng.uniform(-100, 100);
        for (auto& v : b) v += c;
        EXPECT_EQ(classify_logits(a).cls, classify_logits(b).cls);
    }
}

TEST(Backend, FailuresAreWrapped) {
    CallbackBackend broken("broken", 8, [](const image::ImageTensor&) -> Logits {
        throw std::runtime_error("device lost");
    });
    EXPECT_THROW(broken.predict(image::ImageTensor(8, 8)), BackendFailure);
    RouterNetBackend net(init_router_net<float>(0), 16);
    EXPECT_THROW(net.predict(image::ImageTensor(8, 8)), BackendFailure);
    const auto pred = net.predict(image::ImageTensor(16, 16, 0.5f));
    double sum = 0;
    for (const double v : pred.probabilities) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GE(pred.latency_s, 0.0);
}

TEST(Backend, TrainedModelRecognisesDisk) {
    const auto weights = testsupport::data_dir() / "models" / "routernet_mu_synth64.rnmw";
    ASSERT_TRUE(std::filesystem::exists(weights)) << weights;
    RouterNetBackend net(load_weights_file(weights), 64);
    Xoshiro256ss rng(999);
    for (int i = 0; i < 10; ++i) {
        const auto disk = render_pattern(BodyPartClass::PediatricChest, 64, rng);
        EXPECT_EQ(net.predict(disk).cls, BodyPartClass::PediatricChest);
    }
}
