#pragma once

#include <span>

#include "gaat/ad/sparse_ops.hpp"
#include "gaat/ad/tensor.hpp"
#include "gaat/rng.hpp"

namespace gaat::nn {

using ad::Csr;
using ad::Tensor;

/// One attention head: weight d x d', attention vector 2d' x 1 split as [source; neighbor].
struct GatHead {
    Tensor weight;
    Tensor attn;
};

enum class HeadMerge { concat, average };

/// Attention coefficients of one head over the pattern (nnz x 1, rows sum to 1).
Tensor gat_attention(const Tensor& x, const GatHead& head, const Csr& pattern, double slope = 0.2);

/// Multi-head graph attention over `pattern` (neighbors plus self).
/// Each head yields ELU(sum_j alpha_ij W x_j); heads are concatenated or averaged,
/// and dropout is applied to the merged activation.
Tensor gat_forward(const Tensor& x, std::span<const GatHead> heads, const Csr& pattern, HeadMerge merge,
                   double dropout, bool train, Rng& rng);

/// Single-head attention layer used as the low-dimensional output head. No dropout.
Tensor attention_enhance(const Tensor& x, const GatHead& head, const Csr& pattern);

}  // namespace gaat::nn
