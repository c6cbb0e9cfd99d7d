#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace dicomrouter::eval {

class ClassTooSmall : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SplitSpec {
    std::array<double, 3> ratios{0.7, 0.15, 0.15};  // train, val, test
    std::uint64_t seed = 0;
};

struct SplitResult {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Per class of size n (in order of first appearance of each index): shuffle
/// with a stream derived from (seed, class), take floor(r_train * n) for
/// train, floor(r_val * n) for val, the rest for test. Ratios are applied in
/// exact integer arithmetic at millionth resolution. Each result list is
/// sorted ascending. Throws ClassTooSmall when a present class has fewer
/// than 3 examples, std::invalid_argument for negative labels or ratios that
/// do not sum to 1.
SplitResult stratified_split(std::span<const int> labels, const SplitSpec& spec = {});

/// Per-class (train, val, test) sizes for a class of n examples.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitSpec& spec = {});

}  // namespace dicomrouter::eval
