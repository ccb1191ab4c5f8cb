#include "gaat/nn/encoder.hpp"

#include <cmath>
#include <vector>

#include "gaat/ad/ops.hpp"
#include "gaat/error.hpp"

namespace gaat::nn {

Tensor distant_bias(const Tensor& z, const ad::WeightedCsr& distant_mean, const DistantBiasParams& params) {
    Tensor pooled = ad::spmm_const(distant_mean, z);
    return ad::add_row(ad::matmul(pooled, params.weight), params.bias);
}

namespace {

Eigen::Index head_width(const Tensor& z, int heads) {
    if (heads < 1 || z.cols() % heads != 0) {
        throw ShapeError("model width " + std::to_string(z.cols()) + " is not divisible by " + std::to_string(heads) +
                         " heads");
    }
    return z.cols() / heads;
}

}  // namespace

Tensor attention_head_probs(const Tensor& z, const Tensor& key_bias, const AttentionParams& p, int heads, int head) {
    const Eigen::Index dk = head_width(z, heads);
    Tensor q = ad::slice_cols(ad::matmul(z, p.query), head * dk, dk);
    Tensor k = ad::slice_cols(ad::matmul(z, p.key), head * dk, dk);
    return ad::attention_probs(q, k, key_bias, 1.0 / std::sqrt(static_cast<double>(dk)));
}

Tensor biased_attention(const Tensor& z, const Tensor& key_bias, const AttentionParams& p, int heads) {
    const Eigen::Index dk = head_width(z, heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    Tensor q = ad::matmul(z, p.query);
    Tensor k = ad::matmul(z, p.key);
    Tensor v = ad::matmul(z, p.value);
    std::vector<Tensor> outs;
    outs.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        Tensor probs = ad::attention_probs(ad::slice_cols(q, h * dk, dk), ad::slice_cols(k, h * dk, dk), key_bias, scale);
        outs.push_back(ad::matmul(probs, ad::slice_cols(v, h * dk, dk)));
    }
    Tensor merged = heads == 1 ? outs[0] : ad::concat_cols(outs);
    return ad::add_row(ad::matmul(merged, p.out_weight), p.out_bias);
}

Tensor transformer_encoder(const Tensor& z, const Tensor& key_bias, std::span<const EncoderLayerParams> layers,
                           int heads, double dropout, bool train, Rng& rng) {
    Tensor x = z;
    for (const EncoderLayerParams& layer : layers) {
        Tensor attn = ad::dropout(biased_attention(x, key_bias, layer.attn, heads), dropout, train, rng);
        x = ad::layer_norm(ad::add(x, attn), layer.norm1_scale, layer.norm1_shift);
        Tensor hidden = ad::gelu(ad::add_row(ad::matmul(x, layer.ffn_in_weight), layer.ffn_in_bias));
        Tensor ffn = ad::add_row(ad::matmul(hidden, layer.ffn_out_weight), layer.ffn_out_bias);
        x = ad::layer_norm(ad::add(x, ad::dropout(ffn, dropout, train, rng)), layer.norm2_scale, layer.norm2_shift);
    }
    return x;
}

}  // namespace gaat::nn
