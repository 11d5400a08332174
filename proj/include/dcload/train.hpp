#pragma once

#include "dcload/model.hpp"
#include "dcload/network.hpp"
#include "dcload/preprocess.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace dcload {

enum class OptimizerKind { adam, sgd };

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
    ModelHyper hyper;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t max_epochs = 100;
    // Epochs without a new best validation loss before stopping.
    std::size_t patience = 10;
    // Global L2 norm the batch gradient is clipped to; <= 0 disables.
    double clip_norm = 5.0;
    std::uint64_t seed = 42;

    bool operator==(const TrainConfig&) const = default;
};

// Throws ConfigError.
void validate(const TrainConfig& config);

// Losses are in normalized units, one entry per completed epoch.
struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::size_t best_index = 0;  // 0-based epoch with the lowest val_loss

    std::size_t epochs() const noexcept { return train_loss.size(); }
};

// (1/P) * sum (prediction - target)^2
double mse_loss(std::span<const double> prediction, std::span<const double> target);

struct AdamState {
    ModelWeights first_moment;
    ModelWeights second_moment;
    std::uint64_t step = 0;

    static AdamState for_weights(const ModelWeights& w);
};

// Bias-corrected Adam update with the config's learning rate, beta1, beta2
// and epsilon.
void adam_step(ModelWeights& weights, const ModelWeights& gradient, AdamState& state,
               const TrainConfig& config);

void sgd_step(ModelWeights& weights, const ModelWeights& gradient, double learning_rate);

double global_norm(const ModelWeights& gradient);

// Rescales gradient so its global norm is at most max_norm. Returns the norm
// before clipping.
double clip_global_norm(ModelWeights& gradient, double max_norm);

// Mean per-window MSE over a window range, evaluated in batches.
double mean_loss(const ModelWeights& w, const WindowedDataset& data, IndexRange range,
                 std::size_t batch_size, Network& net);

// Called after every epoch with the 1-based epoch number; returning false
// stops training early.
using EpochCallback = std::function<bool(std::size_t epoch, double train_loss, double val_loss)>;

struct TrainResult {
    ModelWeights weights;  // from the best validation epoch
    TrainHistory history;
};

// Mini-batch training on the train split with per-epoch validation and
// early stopping. The train windows are reshuffled each epoch by a generator
// seeded from config.seed; within a batch gradients are summed in window
// order, so a run is reproducible bit for bit. Throws DivergenceError on a
// non-finite loss.
TrainResult train(const TrainConfig& config, const WindowedDataset& data,
                  const EpochCallback& on_epoch = {});

} // namespace dcload
