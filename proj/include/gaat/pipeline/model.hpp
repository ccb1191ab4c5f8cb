#pragma once

#include <span>
#include <string>

#include "gaat/ad/params.hpp"
#include "gaat/ad/sparse_ops.hpp"
#include "gaat/distant.hpp"
#include "gaat/graph.hpp"
#include "gaat/pipeline/config.hpp"
#include "gaat/split.hpp"

namespace gaat::pipeline {

using ad::Tensor;
using graph::Edge;
using graph::Graph;

enum class Stage { pretrain, finetune };

std::string to_string(Stage s);
Stage parse_stage(std::string_view s);

/// Per-graph constants consumed by a forward pass. Built from the training view only.
struct GraphInputs {
    ad::Csr pattern;                // neighbors plus self
    ad::WeightedCsr distant_mean;   // pretrain only
    Tensor features;                // diffused x_init (pretrain) or x_init (fine-tune)
};

/// Diffuses x_init over the training view and samples the distant-neighbor table.
GraphInputs prepare_pretrain_inputs(const Graph& train_view, const Matrix& x_init, const PretrainConfig& cfg);
GraphInputs prepare_finetune_inputs(const Graph& train_view, const Matrix& x_init);

/// Parameters plus the architecture that interprets them.
///
/// Pretrain tensors: gat.head{k}.{weight,attn}, distant.{weight,bias},
/// encoder.{l}.attn.{query,key,value,out}.weight, encoder.{l}.attn.out.bias,
/// encoder.{l}.ffn.{in,out}.{weight,bias}, encoder.{l}.norm{1,2}.{scale,shift},
/// enhance.{weight,attn}, score.psi.
/// Fine-tune tensors: gat.{weight,attn}, adapter.{w1,w2,w3}, norm.{scale,shift},
/// enhance.{weight,attn}, score.psi.
struct GaatModel {
    Stage stage = Stage::pretrain;
    ModelConfig model;
    Ablation ablation;
    int adapter_dim = 0;  // fine-tune only
    ad::ModelParams params;

    /// Output embeddings Z'' (n x out_dim).
    Tensor embed(const GraphInputs& inputs, bool train, Rng& rng) const;
    /// Link scores of `pairs` under the configured scorer (E x 1).
    Tensor score(const Tensor& z, std::span<const Edge> pairs) const;

    /// Canonical description of the architecture; checkpoints carry its hash.
    std::string architecture() const;
    std::string fingerprint() const;
};

/// Fresh pretrain model with Xavier weights drawn from the "init" substream of `seed`.
GaatModel make_pretrain_model(const ModelConfig& model, const Ablation& ablation, std::uint64_t seed);

/// Architecture string of the pretrain model a fine-tune config expects.
std::string pretrain_fingerprint(const ModelConfig& model, const Ablation& ablation);

}  // namespace gaat::pipeline
