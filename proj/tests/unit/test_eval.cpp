#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <thread>

#include "dicomrouter/eval/bootstrap.hpp"
#include "dicomrouter/eval/confusion.hpp"
#include "dicomrouter/eval/latency.hpp"
#include "dicomrouter/eval/predictions_csv.hpp"
#include "dicomrouter/eval/report.hpp"
#include "dicomrouter/eval/split.hpp"
#include "dicomrouter/nn/backend.hpp"
#include "dicomrouter/nn/loss.hpp"
#include "dicomrouter/nn/router_net.hpp"
#include "metric_oracle.hpp"
#include "test_support.hpp"

using namespace dicomrouter;
using namespace dicomrouter::eval;

namespace {

std::vector<int> labels_for_sizes(const std::vector<std::size_t>& sizes) {
    std::vector<int> labels;
    for (std::size_t c = 0; c < sizes.size(); ++c) labels.insert(labels.end(), sizes[c], static_cast<int>(c));
    return labels;
}

}  // namespace

TEST(Confusion, DiagonalEmptyAndHandTally) {
    const std::vector<int> y = {0, 1, 1, 2, 4, 4, 4};
    const auto cm = confusion_matrix(y, y);
    for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t p = 0; p < 5; ++p) EXPECT_EQ(cm.counts[a][p], a == p ? cm.support(a) : 0u);
    }
    EXPECT_EQ(cm.support(4), 3u);
    EXPECT_EQ(cm.accuracy(), 1.0);

    const auto empty = confusion_matrix({}, {});
    EXPECT_EQ(empty.total(), 0u);
    EXPECT_EQ(empty.accuracy(), 0.0);

    // (actual, predicted): (0,0) (0,1) (1,1) (2,2) (2,0) (3,4)
    const std::vector<int> labels = {0, 0, 1, 2, 2, 3};
    const std::vector<int> preds = {0, 1, 1, 2, 0, 4};
    const auto h = confusion_matrix(preds, labels);
    EXPECT_EQ(h.counts[0][0], 1u);
    EXPECT_EQ(h.counts[0][1], 1u);
    EXPECT_EQ(h.counts[1][1], 1u);
    EXPECT_EQ(h.counts[2][2], 1u);
    EXPECT_EQ(h.counts[2][0], 1u);
    EXPECT_EQ(h.counts[3][4], 1u);
    EXPECT_EQ(h.total(), 6u);
    EXPECT_EQ(h.correct(), 3u);
}

TEST(Confusion, Errors) {
    const std::vector<int> a = {0, 1}, b = {0};
    EXPECT_THROW(confusion_matrix(a, b), LengthMismatch);
    const std::vector<int> bad = {0, 7};
    EXPECT_THROW(confusion_matrix(bad, a), nn::LabelOutOfRange);
}

TEST(ClassMetricsTest, HandExamples) {
    ConfusionMatrix cm;
    cm.counts[0][0] = 8;  // TP
    cm.counts[1][0] = 2;  // FP for class 0
    cm.counts[0][1] = 2;  // FN for class 0
    const auto m = precision_recall_f1(cm, 0);
    EXPECT_DOUBLE_EQ(m.precision, 0.8);
    EXPECT_DOUBLE_EQ(m.recall, 0.8);
    EXPECT_DOUBLE_EQ(m.f1, 0.8);

    ConfusionMatrix half;
    half.counts[0][0] = 1;
    half.counts[1][0] = 1;
    const auto h = precision_recall_f1(half, 0);
    EXPECT_DOUBLE_EQ(h.precision, 0.5);
    EXPECT_DOUBLE_EQ(h.recall, 1.0);
    EXPECT_DOUBLE_EQ(h.f1, 2.0 / 3.0);

    const auto absent = precision_recall_f1(cm, 3);
    EXPECT_TRUE(absent.degenerate);
    EXPECT_EQ(absent.precision, 0.0);
    EXPECT_EQ(absent.recall, 0.0);
    EXPECT_EQ(absent.f1, 0.0);
}

TEST(Macro, PerfectAndToy) {
    const std::vector<int> y = {0, 1, 2, 3, 4, 0};
    const auto perfect = macro_metrics(confusion_matrix(y, y));
    EXPECT_EQ(perfect.precision, 1.0);
    EXPECT_EQ(perfect.recall, 1.0);
    EXPECT_EQ(perfect.f1, 1.0);

    // Class 0 f1 1.0, class 1 f1 0.5; class 3 is only predicted and class 2
    // never appears, both degenerate.
    const std::vector<int> labels = {0, 1, 1, 1};
    const std::vector<int> preds = {0, 1, 3, 3};
    const auto m = macro_metrics(confusion_matrix(preds, labels));
    EXPECT_DOUBLE_EQ(m.f1, 0.75);
    EXPECT_EQ(m.classes_averaged, 2u);
    EXPECT_TRUE(m.excluded[2]);
    EXPECT_TRUE(m.excluded[3]);
    EXPECT_FALSE(m.excluded[1]);
}

TEST(Macro, MatchesBruteForceOracle) {
    Xoshiro256ss rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        std::vector<int> preds(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.below(5));
            preds[i] = rng.below(3) ? labels[i] : static_cast<int>(rng.below(5));
        }
        const auto cm = confusion_matrix(preds, labels);
        const auto oracle = testsupport::brute_force_tally(preds, labels);
        for (std::size_t k = 0; k < 5; ++k) {
            const auto m = precision_recall_f1(cm, k);
            ASSERT_NEAR(m.precision, oracle.precision[k], 1e-12);
            ASSERT_NEAR(m.recall, oracle.recall[k], 1e-12);
            ASSERT_NEAR(m.f1, oracle.f1[k], 1e-12);
            ASSERT_EQ(m.degenerate, oracle.degenerate[k]);
            // Invariants.
            ASSERT_EQ(cm.support(k), m.tp + m.fn);
            ASSERT_EQ(cm.predicted_count(k), m.tp + m.fp);
        }
        const auto macro = macro_metrics(cm);
        ASSERT_NEAR(macro.precision, oracle.macro_p, 1e-12);
        ASSERT_NEAR(macro.recall, oracle.macro_r, 1e-12);
        ASSERT_NEAR(macro.f1, oracle.macro_f1, 1e-12);
        ASSERT_EQ(cm.total(), n);
        std::size_t match = 0;
        for (std::size_t i = 0; i < n; ++i) match += preds[i] == labels[i];
        ASSERT_NEAR(cm.accuracy(), double(match) / double(n), 1e-15);
        for (const double v : {macro.precision, macro.recall, macro.f1}) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
    }
}

TEST(Percentile, LinearInterpolation) {
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(percentile({0, 10}, 0.25), 2.5);
}

TEST(Bootstrap, AllCorrectGivesUnitInterval) {
    const std::vector<int> y = {0, 1, 2, 3, 4, 2, 2, 1};
    for (const auto& fn : {metrics::accuracy, metrics::macro_recall, metrics::macro_precision, metrics::macro_f1}) {
        const auto ci = bootstrap_ci(y, y, fn, 500, 0.95, 3);
        EXPECT_EQ(ci.lo, 1.0);
        EXPECT_EQ(ci.hi, 1.0);
        EXPECT_EQ(ci.point, 1.0);
    }
}

TEST(Bootstrap, SeedDeterminismAndOrdering) {
    Xoshiro256ss rng(4);
    std::vector<int> preds(80), labels(80);
    for (std::size_t i = 0; i < 80; ++i) {
        labels[i] = static_cast<int>(rng.below(5));
        preds[i] = rng.below(4) ? labels[i] : static_cast<int>(rng.below(5));
    }
    const auto a = bootstrap_ci(preds, labels, metrics::macro_f1, 2000, 0.95, 99);
    const auto b = bootstrap_ci(preds, labels, metrics::macro_f1, 2000, 0.95, 99);
    EXPECT_EQ(std::memcmp(&a.lo, &b.lo, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a.hi, &b.hi, sizeof(double)), 0);
    EXPECT_EQ(a.replicates, b.replicates);
    EXPECT_LE(a.lo, a.point);
    EXPECT_LE(a.point, a.hi);
    const auto c = bootstrap_ci(preds, labels, metrics::macro_f1, 2000, 0.95, 100);
    EXPECT_NE(a.replicates, c.replicates);
}

TEST(Bootstrap, ThreeSampleEnumeration) {
    // One error among three: the number of times the wrong pair is drawn is
    // Binomial(3, 1/3), so accuracy is 1, 2/3, 1/3, 0 with probabilities
    // 8/27, 12/27, 6/27, 1/27.
    const std::vector<int> labels = {0, 1, 2};
    const std::vector<int> preds = {0, 1, 3};
    const auto ci = bootstrap_ci(preds, labels, metrics::accuracy, 10000, 0.95, 7);
    std::map<long, int> counts;
    for (const double r : ci.replicates) ++counts[std::lround(r * 3)];
    const double exact[4] = {1.0 / 27, 6.0 / 27, 12.0 / 27, 8.0 / 27};
    for (int k = 0; k <= 3; ++k) EXPECT_NEAR(counts[k] / 10000.0, exact[k], 0.02) << k;
    // Exact 2.5% and 97.5% quantiles of that distribution are 0 and 1.
    EXPECT_NEAR(ci.lo, 0.0, 0.02);
    EXPECT_NEAR(ci.hi, 1.0, 0.02);
}

TEST(Bootstrap, Errors) {
    const std::vector<int> empty;
    EXPECT_THROW(bootstrap_ci(empty, empty, metrics::accuracy), EmptyInput);
    const std::vector<int> y = {1};
    EXPECT_THROW(bootstrap_ci(y, y, metrics::accuracy, 0), std::invalid_argument);
    EXPECT_THROW(bootstrap_ci(y, y, metrics::accuracy, 10, 1.0), std::invalid_argument);
    const std::vector<int> two = {1, 2};
    EXPECT_THROW(bootstrap_ci(y, two, metrics::accuracy), LengthMismatch);
}

TEST(Split, ReferenceCountsForSeveralSeeds) {
    const auto labels = labels_for_sizes({1179, 3292, 6218, 2228, 3176});
    const std::size_t train_want[] = {825, 2304, 4352, 1559, 2223};
    const std::size_t val_want[] = {176, 493, 932, 334, 476};
    const std::size_t test_want[] = {178, 495, 934, 335, 477};
    for (const std::uint64_t seed : {0ull, 1ull, 42ull}) {
        const auto s = stratified_split(labels, {{0.7, 0.15, 0.15}, seed});
        EXPECT_EQ(s.train.size(), 11263u);
        EXPECT_EQ(s.val.size(), 2411u);
        EXPECT_EQ(s.test.size(), 2419u);
        std::size_t tr[5]{}, va[5]{}, te[5]{};
        for (const auto i : s.train) ++tr[labels[i]];
        for (const auto i : s.val) ++va[labels[i]];
        for (const auto i : s.test) ++te[labels[i]];
        for (int c = 0; c < 5; ++c) {
            EXPECT_EQ(tr[c], train_want[c]);
            EXPECT_EQ(va[c], val_want[c]);
            EXPECT_EQ(te[c], test_want[c]);
        }
    }
}

TEST(Split, FloorRuleAndPartition) {
    EXPECT_EQ(split_counts(10), (std::array<std::size_t, 3>{7, 1, 2}));
    Xoshiro256ss rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> labels(3 * 5 + rng.below(200));
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i < 15 ? i / 3 : rng.below(5));
        const auto s = stratified_split(labels, {{0.7, 0.15, 0.15}, trial + 0ull});
        std::vector<std::size_t> all;
        all.insert(all.end(), s.train.begin(), s.train.end());
        all.insert(all.end(), s.val.begin(), s.val.end());
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        ASSERT_EQ(all.size(), labels.size());
        for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i], i);
        ASSERT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
    }
}

TEST(Split, MembershipDependsOnSeed) {
    const auto labels = labels_for_sizes({100, 100});
    const auto a = stratified_split(labels, {{0.7, 0.15, 0.15}, 1});
    const auto b = stratified_split(labels, {{0.7, 0.15, 0.15}, 1});
    const auto c = stratified_split(labels, {{0.7, 0.15, 0.15}, 2});
    EXPECT_EQ(a.train, b.train);
    EXPECT_NE(a.train, c.train);
}

TEST(Split, Errors) {
    EXPECT_THROW(stratified_split(labels_for_sizes({10, 2})), ClassTooSmall);
    EXPECT_THROW(stratified_split(labels_for_sizes({10}), {{0.5, 0.2, 0.2}, 0}), std::invalid_argument);
    const std::vector<int> negative = {0, 0, 0, -1, -1, -1};
    EXPECT_THROW(stratified_split(negative), std::invalid_argument);
}

TEST(Latency, SleepingBackendAndBookkeeping) {
    std::atomic<int> calls{0};
    nn::CallbackBackend slow("sleepy", 8, [&](const image::ImageTensor&) {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        return nn::Logits{};
    });
    const std::vector<image::ImageTensor> images(6, image::ImageTensor(8, 8));
    const auto r = latency_benchmark(slow, images, 3);
    EXPECT_EQ(calls.load(), 9);
    EXPECT_EQ(r.samples_s.size(), 6u);
    EXPECT_EQ(r.warmup, 3u);
    EXPECT_GE(r.mean_s, 0.009);
    EXPECT_LE(r.mean_s, 0.020);
    double sum = 0;
    for (const double s : r.samples_s) sum += s;
    EXPECT_NEAR(r.mean_s, sum / 6.0, 1e-9);
    EXPECT_THROW(latency_benchmark(slow, std::span<const image::ImageTensor>{}, 1), std::invalid_argument);
}

TEST(Report, CiFormatting) {
    BootstrapCI ci;
    ci.point = 0.982;
    ci.lo = 0.977;
    ci.hi = 0.988;
    ci.iterations = 10000;
    EXPECT_EQ(format_ci(ci), "0.982 (0.977–0.988)");
    ci.iterations = 0;
    EXPECT_THROW(format_ci(ci), std::invalid_argument);
}

TEST(Report, TableAndCsv) {
    BootstrapCI ci;
    ci.point = 0.982;
    ci.lo = 0.977;
    ci.hi = 0.988;
    ci.iterations = 10000;
    ModelResult r{"RouterNet-mu", ci, ci, ci, 0.0123, nn::router_net_architecture().parameter_count()};
    const std::vector<ModelResult> rows{r};
    const auto text = emit_report(rows);
    for (const char* col : {"Model", "Recall (CI)", "Precision (CI)", "F1-score (CI)", "Inference Time", "#Parameters"}) {
        EXPECT_NE(text.find(col), std::string::npos) << col;
    }
    EXPECT_NE(text.find("0.982 (0.977–0.988)"), std::string::npos);
    EXPECT_NE(text.find("6053"), std::string::npos);
    const auto csv = emit_report_csv(rows);
    EXPECT_NE(csv.find("RouterNet-mu"), std::string::npos);
    EXPECT_THROW(emit_report(std::span<const ModelResult>{}), std::invalid_argument);
}

TEST(PredictionsCsv, RoundTripAndErrors) {
    std::vector<PredictionRow> rows = {
        {"a", 0, 0, {0.9, 0.05, 0.02, 0.02, 0.01}},
        {"b", 3, 4, {0.1, 0.1, 0.1, 0.3, 0.4}},
    };
    const auto text = write_predictions_csv(rows);
    EXPECT_EQ(text.substr(0, kPredictionsHeader.size()), kPredictionsHeader);
    EXPECT_EQ(read_predictions_csv(text), rows);
    EXPECT_THROW(write_predictions_csv({{"x,y", 0, 0, {}}}), std::invalid_argument);
    EXPECT_THROW(read_predictions_csv("id,label\n"), CsvFormatError);
    EXPECT_THROW(read_predictions_csv(std::string(kPredictionsHeader) + "\na,9,0,0,0,0,0,1\n"), CsvFormatError);
    EXPECT_THROW(read_predictions_csv(std::string(kPredictionsHeader) + "\na,1,0,0.5\n"), CsvFormatError);
}
