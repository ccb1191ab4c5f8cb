#pragma once

#include "gaat/ad/tensor.hpp"

namespace gaat::nn {

using ad::Tensor;

/// Bottleneck maps W1: d x q, W2: q x q, W3: q x d.
struct AdapterParams {
    Tensor w1, w2, w3;
};

/// z + gelu(gelu(z W1) W2) W3.
Tensor adapter_forward(const Tensor& z, const AdapterParams& params);

}  // namespace gaat::nn
