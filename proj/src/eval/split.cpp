#include "dicomrouter/eval/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "dicomrouter/rng.hpp"

namespace dicomrouter::eval {

namespace {

constexpr std::uint64_t kRatioScale = 1'000'000;

std::array<std::uint64_t, 3> scaled_ratios(const SplitSpec& spec) {
    std::array<std::uint64_t, 3> out{};
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double r = spec.ratios[i];
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("split ratio outside [0,1]");
        total += r;
        out[i] = static_cast<std::uint64_t>(std::llround(r * static_cast<double>(kRatioScale)));
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split ratios must sum to 1");
    return out;
}

}  // namespace

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitSpec& spec) {
    const auto r = scaled_ratios(spec);
    const std::size_t train = static_cast<std::size_t>(n * r[0] / kRatioScale);
    const std::size_t val = static_cast<std::size_t>(n * r[1] / kRatioScale);
    return {train, val, n - train - val};
}

SplitResult stratified_split(std::span<const int> labels, const SplitSpec& spec) {
    scaled_ratios(spec);
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw std::invalid_argument("negative label at index " + std::to_string(i));
        by_class[labels[i]].push_back(i);
    }

    SplitResult out;
    for (auto& [cls, indices] : by_class) {
        if (indices.size() < 3) {
            throw ClassTooSmall("class " + std::to_string(cls) + " has " +
                                std::to_string(indices.size()) + " examples, need at least 3");
        }
        auto rng = Xoshiro256ss::for_stream(spec.seed, static_cast<std::uint64_t>(cls));
        rng.shuffle(std::span<std::size_t>(indices));
        const auto counts = split_counts(indices.size(), spec);
        const auto val_begin = indices.begin() + static_cast<std::ptrdiff_t>(counts[0]);
        const auto test_begin = val_begin + static_cast<std::ptrdiff_t>(counts[1]);
        out.train.insert(out.train.end(), indices.begin(), val_begin);
        out.val.insert(out.val.end(), val_begin, test_begin);
        out.test.insert(out.test.end(), test_begin, indices.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

}  // namespace dicomrouter::eval
