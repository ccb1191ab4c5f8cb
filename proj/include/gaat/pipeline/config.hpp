#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaat/ad/params.hpp"
#include "gaat/objective.hpp"

namespace gaat::pipeline {

/// Architecture shared by both stages. Every transferred tensor is keyed by these
/// widths only, so a checkpoint applies to any graph with the same input width.
struct ModelConfig {
    int input_dim = 256;
    int gat_heads = 4;
    int gat_head_dim = 64;
    int encoder_layers = 2;
    int encoder_heads = 4;
    int ffn_dim = 64;
    int out_dim = 8;
    double dropout = 0.3;
    double psi_init = 0.1;
};

struct Ablation {
    bool non_aug = false;    // pretrain without diffusion
    bool non_ft = false;     // pretrain without the transformer encoder
    bool non_sa = false;     // fine-tune without the self-adapter
    bool non_con = false;    // no contrastive term
    bool score_dot = false;  // sigmoid dot-product scoring

    /// "GAATNet", "NonSA", "GAATNet_dot", ... combined with '+'.
    std::string variant() const;
};

struct LossConfig {
    /// Unset means 0.5, or 0.7 for graphs with more than 1e5 edges.
    std::optional<double> lambda;
    double tau = 0.5;
    obj::Denominator denominator = obj::Denominator::per_anchor;

    double resolved_lambda(std::size_t num_edges) const;
};

struct OptimConfig {
    int epochs = 200;
    int patience = 20;
    ad::AdamConfig adam;
};

struct PretrainConfig {
    ModelConfig model;
    LossConfig loss;
    OptimConfig optim;
    double alpha = 0.15;
    int diffusion_steps = 50;
    std::vector<int> hops{2, 3};
    std::size_t distant_per_node = 4;
    std::uint64_t seed = 1;
    Ablation ablation;
};

struct FinetuneConfig {
    int adapter_dim = 8;
    LossConfig loss;
    OptimConfig optim;
    std::uint64_t seed = 1;
    Ablation ablation;
    /// Control run: same architecture, backbone drawn at random instead of loaded.
    bool random_backbone = false;
    bool allow_fingerprint_mismatch = false;
};

}  // namespace gaat::pipeline
