#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gaat/pipeline/checkpoint.hpp"
#include "gaat/pipeline/model.hpp"
#include "gaat/split.hpp"

namespace gaat::pipeline {

struct MetricsRecord {
    std::string stage;
    int epoch = 0;
    std::string split;
    double auc = 0.0;
    double f1 = 0.0;
    double ap = 0.0;
    double loss_link = 0.0;
    double loss_con = 0.0;
    double loss_total = 0.0;
    double seconds_per_epoch = 0.0;
    std::size_t trainable_params = 0;
};

/// One JSON object, no trailing newline.
std::string to_json(const MetricsRecord& r);

using MetricsSink = std::function<void(const MetricsRecord&)>;

struct TrainResult {
    int best_epoch = 0;
    double best_val_auc = -1.0;
    int epochs_run = 0;
    double mean_seconds_per_epoch = 0.0;
    std::vector<MetricsRecord> train_history;
    std::vector<MetricsRecord> val_history;
    /// Set when a non-finite value stopped training; the model then holds the best snapshot so far.
    std::optional<std::string> numeric_failure;
};

/// Throws std::logic_error when the message-passing pattern contains a val/test positive.
void assert_no_leakage(const GraphInputs& inputs, const graph::EdgeSplit& split);

/// Trains the trainable subset of `model` on the task's training edges with early stopping
/// on validation AUC (ties keep the earlier epoch) and restores the best parameters.
/// The validation history starts with an epoch-0 record of the untrained model.
TrainResult train(GaatModel& model, const GraphInputs& inputs, const graph::LinkTask& task, const LossConfig& loss,
                  const OptimConfig& optim, std::uint64_t seed, const MetricsSink& sink = {});

/// Eval-mode metrics on one split's positives and negatives.
MetricsRecord evaluate(const GaatModel& model, const GraphInputs& inputs, const graph::EdgeSplit& split,
                       graph::SplitName which, const LossConfig& loss, std::size_t num_edges);

struct PretrainRun {
    PretrainConfig config;
    GaatModel model;
    GraphInputs inputs;
    TrainResult result;
    /// Best parameters plus run settings; the source identity is left to the caller.
    Checkpoint checkpoint() const;
};

PretrainRun pretrain(const graph::LinkTask& task, const Matrix& x_init, const PretrainConfig& cfg,
                     const MetricsSink& sink = {});

/// Fine-tune network from a pretrain checkpoint. Frozen: the first-layer weight (the
/// pretrained heads side by side) and the output head. Trainable: the new first-layer
/// attention vector, the adapter, the normalization and the score weights.
GaatModel build_finetune_model(const Checkpoint& ckpt, int target_dim, const FinetuneConfig& cfg);

struct FinetuneRun {
    FinetuneConfig config;
    GaatModel model;
    GraphInputs inputs;
    TrainResult result;
    std::size_t pretrain_trainable_params = 0;
    std::string pretrain_fingerprint;
    Checkpoint checkpoint() const;
};

FinetuneRun finetune(const graph::LinkTask& task, const Matrix& x_init, const Checkpoint& ckpt,
                     const FinetuneConfig& cfg, const MetricsSink& sink = {});

}  // namespace gaat::pipeline
