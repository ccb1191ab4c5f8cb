#pragma once

#include <span>

#include "gaat/ad/sparse_ops.hpp"
#include "gaat/ad/tensor.hpp"
#include "gaat/rng.hpp"

namespace gaat::nn {

using ad::Tensor;

/// Linear readout of the mean distant-neighbor embedding: weight d x 1, bias 1 x 1.
struct DistantBiasParams {
    Tensor weight;
    Tensor bias;
};

/// b_i = bias + weight . mean(z_j for sampled distant j); n x 1.
Tensor distant_bias(const Tensor& z, const ad::WeightedCsr& distant_mean, const DistantBiasParams& params);

struct AttentionParams {
    Tensor query, key, value;  // d x d
    Tensor out_weight;         // d x d
    Tensor out_bias;           // 1 x d
};

struct EncoderLayerParams {
    AttentionParams attn;
    Tensor ffn_in_weight, ffn_in_bias;    // d x d_ff, 1 x d_ff
    Tensor ffn_out_weight, ffn_out_bias;  // d_ff x d, 1 x d
    Tensor norm1_scale, norm1_shift;
    Tensor norm2_scale, norm2_shift;
};

/// Per head h: softmax(Q_h K_h^T / sqrt(d_k) + 1 b^T) V_h; heads concatenated and projected.
/// `key_bias` is n x 1 and is added to every query row (key-side).
Tensor biased_attention(const Tensor& z, const Tensor& key_bias, const AttentionParams& params, int heads);

/// Attention probabilities of one head (n x n). For inspection and tests.
Tensor attention_head_probs(const Tensor& z, const Tensor& key_bias, const AttentionParams& params, int heads,
                            int head);

/// Post-norm encoder stack:
///   z = LN(z + Dropout(attn(z, b)));  z = LN(z + Dropout(W2 gelu(W1 z + c1) + c2))
Tensor transformer_encoder(const Tensor& z, const Tensor& key_bias, std::span<const EncoderLayerParams> layers,
                           int heads, double dropout, bool train, Rng& rng);

}  // namespace gaat::nn
