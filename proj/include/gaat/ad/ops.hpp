#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaat/ad/tensor.hpp"
#include "gaat/rng.hpp"

namespace gaat::ad {

// Dense primitives. Every op records the inputs its vector-Jacobian product needs
// and throws ShapeError on non-conforming shapes.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
/// a (n x c) + row (1 x c) broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index count);
Tensor slice_rows(const Tensor& a, Eigen::Index start, Eigen::Index count);
/// out.row(k) = a.row(index[k]).
Tensor gather_rows(const Tensor& a, std::span<const std::int32_t> index);

Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.2);
Tensor elu(const Tensor& a, double alpha = 1.0);
/// tanh approximation 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor square(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// n x c -> n x 1.
Tensor row_sum(const Tensor& a);

/// Row-wise softmax over entries where mask(i, j) != 0; masked entries are exactly
/// zero in value and gradient. Rows with no valid entry are all zero.
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
Tensor row_softmax_masked(const Tensor& a, const Mask& mask);
Tensor row_softmax(const Tensor& a);

/// Per-row normalization with learned scale/shift (both 1 x c).
Tensor layer_norm(const Tensor& x, const Tensor& scale, const Tensor& shift, double eps = 1e-5);

/// Inverted dropout. Identity when !train or rate == 0.
Tensor dropout(const Tensor& a, double rate, bool train, Rng& rng);

/// Rows divided by max(||row||, eps).
Tensor row_normalize(const Tensor& a, double eps = 1e-12);

/// softmax(scale * Q K^T + 1 b^T) row-wise, with b (n_k x 1) a key-side bias.
/// Only the probabilities are kept for the backward pass.
Tensor attention_probs(const Tensor& q, const Tensor& k, const Tensor& key_bias, double scale);

/// Mean binary cross-entropy of scores clamped to [eps, 1 - eps] against 0/1 labels.
Tensor binary_cross_entropy(const Tensor& scores, std::span<const double> labels, double eps = 1e-12);

/// out(s) = log sum_{k : segment[k] == s} exp(values(k)); values is E x 1, out is num_segments x 1.
/// Empty segments yield 0 and receive no gradient.
Tensor segment_logsumexp(const Tensor& values, std::span<const std::int32_t> segment, std::int32_t num_segments);

}  // namespace gaat::ad
