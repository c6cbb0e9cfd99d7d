#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dicomrouter/nn/loss.hpp"
#include "dicomrouter/nn/optimizer.hpp"
#include "dicomrouter/nn/router_net.hpp"
#include "dicomrouter/nn/synthetic.hpp"

namespace dicomrouter::nn {

class EmptyDataset : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    Reduction reduction = Reduction::Mean;
    LrSchedule schedule;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean per-example loss over the epoch
    double val_accuracy = 0.0;
    double val_loss = 0.0;  // mean cross-entropy on the validation set
    double lr_start = 0.0;
    std::size_t steps = 0;

    bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
    // From the epoch with the highest validation accuracy; ties go to the
    // lower validation loss, then to the earlier epoch.
    ModelParams<float> params;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0.0;
    double best_val_loss = 0.0;
    std::size_t optimizer_steps = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Weights are initialised from config.seed; each epoch shuffles the
/// training order with a generator derived from the same seed.
TrainResult train(const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Same, starting from given parameters.
TrainResult train_from(ModelParams<float> initial, const std::vector<LabeledExample>& train_set,
                       const std::vector<LabeledExample>& val_set, const TrainConfig& config,
                       const EpochCallback& on_epoch = {});

struct Evaluation {
    double accuracy = 0.0;  // fraction with argmax logit == label
    double mean_loss = 0.0;
};

Evaluation evaluate(const ModelParams<float>& params, const std::vector<LabeledExample>& examples);

inline double accuracy(const ModelParams<float>& params, const std::vector<LabeledExample>& examples) {
    return evaluate(params, examples).accuracy;
}

}  // namespace dicomrouter::nn
