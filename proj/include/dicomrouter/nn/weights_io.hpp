#pragma once

// RNMW weight files.
//
//   "RNMW" | version u16 | tensor count u32
//   per tensor: name length u16 | UTF-8 name | rank u8 | dims u32 x rank | f32 data
//
// All integers and floats little-endian.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "dicomrouter/nn/tensor.hpp"

namespace dicomrouter::nn {

inline constexpr std::uint16_t kWeightsVersion = 1;

class WeightsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class BadMagic : public WeightsError {
public:
    using WeightsError::WeightsError;
};
class VersionUnsupported : public WeightsError {
public:
    using WeightsError::WeightsError;
};
class TruncatedWeights : public WeightsError {
public:
    using WeightsError::WeightsError;
};
class ShapeMismatchWithArchitecture : public WeightsError {
public:
    using WeightsError::WeightsError;
};

std::vector<std::uint8_t> save_weights(const ModelParams<float>& params);

/// Parses and validates against the RouterNet-mu architecture.
ModelParams<float> load_weights(std::span<const std::uint8_t> bytes);

/// Parses without the architecture check (for foreign backends).
ModelParams<float> load_weights_unchecked(std::span<const std::uint8_t> bytes);

void save_weights_file(const ModelParams<float>& params, const std::filesystem::path& path);
ModelParams<float> load_weights_file(const std::filesystem::path& path);

}  // namespace dicomrouter::nn
