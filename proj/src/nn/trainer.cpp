#include "dicomrouter/nn/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dicomrouter/rng.hpp"

namespace dicomrouter::nn {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ull;

void check_examples(const std::vector<LabeledExample>& set, const char* what) {
    if (set.empty()) throw EmptyDataset(std::string(what) + " set is empty");
    for (const auto& ex : set) {
        if (code(ex.label) < 0 || static_cast<std::size_t>(code(ex.label)) >= kNumClasses) {
            throw LabelOutOfRange(std::string(what) + " set has an invalid label");
        }
        if (ex.image.values.size() != ex.image.height * ex.image.width) {
            throw ShapeMismatch(std::string(what) + " set has a malformed image");
        }
    }
}

ImageView<float> view_of(const LabeledExample& ex) {
    return {std::span<const float>(ex.image.values), ex.image.height, ex.image.width};
}

}  // namespace

Evaluation evaluate(const ModelParams<float>& params, const std::vector<LabeledExample>& examples) {
    Evaluation out;
    if (examples.empty()) return out;
    std::size_t correct = 0;
    double loss = 0.0;
    for (const auto& ex : examples) {
        const auto logits = forward_example<float>(params, ex.image.values, ex.image.height,
                                                   ex.image.width);
        std::array<double, kNumClasses> z{};
        std::copy(logits.begin(), logits.end(), z.begin());
        if (static_cast<int>(argmax(z)) == code(ex.label)) ++correct;
        loss += log_sum_exp(z) - z[static_cast<std::size_t>(code(ex.label))];
    }
    const double n = static_cast<double>(examples.size());
    out.accuracy = static_cast<double>(correct) / n;
    out.mean_loss = loss / n;
    return out;
}

TrainResult train(const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    return train_from(init_router_net<float>(config.seed), train_set, val_set, config, on_epoch);
}

TrainResult train_from(ModelParams<float> params, const std::vector<LabeledExample>& train_set,
                       const std::vector<LabeledExample>& val_set, const TrainConfig& config,
                       const EpochCallback& on_epoch) {
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    check_examples(train_set, "training");
    check_examples(val_set, "validation");
    validate_router_net(params);

    TrainResult result;
    auto state = AdamState<float>::fresh(params);
    Xoshiro256ss shuffler = Xoshiro256ss::for_stream(config.seed, kShuffleStream);

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batches = (train_set.size() + config.batch_size - 1) / config.batch_size;

    std::vector<ImageView<float>> images;
    std::vector<int> labels;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffler.shuffle(std::span<std::size_t>(order));
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr_start = config.schedule.lr_at(static_cast<double>(epoch));
        double loss_sum = 0.0;

        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t lo = b * config.batch_size;
            const std::size_t hi = std::min(lo + config.batch_size, order.size());
            images.clear();
            labels.clear();
            for (std::size_t i = lo; i < hi; ++i) {
                images.push_back(view_of(train_set[order[i]]));
                labels.push_back(code(train_set[order[i]].label));
            }
            const auto g = backward<float>(params, images, labels, config.reduction);
            const double batch_total =
                config.reduction == Reduction::Mean ? g.loss * static_cast<double>(hi - lo) : g.loss;
            loss_sum += batch_total;

            const double progress =
                static_cast<double>(epoch) + static_cast<double>(b) / static_cast<double>(batches);
            adam_step(params, g.grads, state, config.schedule.lr_at(progress));
            ++rec.steps;
        }
        result.optimizer_steps += rec.steps;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        const auto val = evaluate(params, val_set);
        rec.val_accuracy = val.accuracy;
        rec.val_loss = val.mean_loss;
        if (epoch == 0 || rec.val_accuracy > result.best_val_accuracy ||
            (rec.val_accuracy == result.best_val_accuracy && rec.val_loss < result.best_val_loss)) {
            result.best_val_accuracy = rec.val_accuracy;
            result.best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            result.params = params;
        }
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

}  // namespace dicomrouter::nn
