#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gaat/io/container.hpp"
#include "gaat/pipeline/model.hpp"

namespace gaat::pipeline {

/// Settings needed next to the parameters to rebuild inputs and report on a run.
struct CheckpointInfo {
    std::string source;  // identity of the graph the model was trained on
    double best_val_auc = 0.0;
    int best_epoch = 0;
    std::size_t trainable_params = 0;
    std::size_t pretrain_trainable_params = 0;  // fine-tune checkpoints: count of the source model
    std::string pretrain_fingerprint;           // fine-tune checkpoints: fingerprint of the source model
    std::uint64_t seed = 0;
    double alpha = 0.0;
    int diffusion_steps = 0;
    std::vector<int> hops;
    std::size_t distant_per_node = 0;
    std::string config_text;  // resolved run config, if any
};

struct Checkpoint {
    GaatModel model;
    CheckpointInfo info;
};

io::ParamContainer to_container(const Checkpoint& ckpt);
/// Rebuilds the model and verifies that the stored fingerprint matches its architecture.
Checkpoint from_container(const io::ParamContainer& c);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// When `expected_fingerprint` is non-empty it must match unless `allow_mismatch` is set.
/// Throws InputError on mismatch or malformed content.
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expected_fingerprint = {},
                           bool allow_mismatch = false);

/// Pretrain settings recorded in a checkpoint, for rebuilding its graph inputs.
PretrainConfig pretrain_settings(const Checkpoint& ckpt);

}  // namespace gaat::pipeline
