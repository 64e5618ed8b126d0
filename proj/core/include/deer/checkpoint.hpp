#pragma once

#include "deer/trainer.hpp"

namespace deer {

/// Binary snapshot of a training run: resolved config text (hashed),
/// schedule position, every named parameter, and the Adam moments of all
/// three optimizers. Loading rebuilds the models from the embedded config
/// and restores tensors by name; magic/length damage is refused with
/// diagnostics.
void save_checkpoint(const std::string& path, const TrainState& state);

TrainState load_checkpoint(const std::string& path);

/// Header peek without restoring tensors (config + schedule position).
struct CheckpointInfo {
    ExperimentConfig cfg;
    Phase phase = Phase::PretrainBp;
    int epoch = 0;
    int64_t gstep = 0;
    uint64_t config_hash = 0;
};
CheckpointInfo read_checkpoint_info(const std::string& path);

}  // namespace deer
