#pragma once

#include "dcload/model.hpp"
#include "dcload/preprocess.hpp"
#include "dcload/train.hpp"

#include <filesystem>
#include <string>

namespace dcload {

inline constexpr int kCheckpointSchemaVersion = 1;

struct Checkpoint {
    ModelWeights weights;
    ScalerParams scaler;
    TrainConfig config;
};

// JSON document: schema_version, architecture, hyper, scaler, train config
// and every tensor as nested arrays under "tensors". Doubles are written in
// shortest round-trip form, so loading reproduces the weights bit for bit
// and save -> load -> save is byte-identical.
std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const ModelWeights& weights, const ScalerParams& scaler, const TrainConfig& config,
                     const std::filesystem::path& path);
// Throws CheckpointError on unknown schema versions, missing fields or
// tensor shapes that disagree with the stored hyperparameters.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace dcload
