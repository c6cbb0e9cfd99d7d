#pragma once

#include <vector>

namespace testsupport {

// Independent tally straight from the pairs.
struct Tally {
    double precision[5], recall[5], f1[5];
    bool degenerate[5];
    double macro_p, macro_r, macro_f1;
};

inline Tally brute_force_tally(const std::vector<int>& preds, const std::vector<int>& labels) {
    Tally t{};
    double sp = 0, sr = 0, sf = 0;
    int n = 0;
    for (int k = 0; k < 5; ++k) {
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] == k && labels[i] == k) ++tp;
            if (preds[i] == k && labels[i] != k) ++fp;
            if (preds[i] != k && labels[i] == k) ++fn;
        }
        t.precision[k] = tp + fp ? double(tp) / (tp + fp) : 0.0;
        t.recall[k] = tp + fn ? double(tp) / (tp + fn) : 0.0;
        const double s = t.precision[k] + t.recall[k];
        t.f1[k] = s > 0 ? 2 * t.precision[k] * t.recall[k] / s : 0.0;
        t.degenerate[k] = tp + fp == 0 || tp + fn == 0;
        if (!t.degenerate[k]) {
            sp += t.precision[k];
            sr += t.recall[k];
            sf += t.f1[k];
            ++n;
        }
    }
    t.macro_p = n ? sp / n : 0;
    t.macro_r = n ? sr / n : 0;
    t.macro_f1 = n ? sf / n : 0;
    return t;
}

}  // namespace testsupport
