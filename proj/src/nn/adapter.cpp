#include "gaat/nn/adapter.hpp"

#include "gaat/ad/ops.hpp"
#include "gaat/error.hpp"

namespace gaat::nn {

Tensor adapter_forward(const Tensor& z, const AdapterParams& p) {
    if (p.w1.rows() != z.cols() || p.w2.rows() != p.w1.cols() || p.w3.rows() != p.w2.cols() || p.w3.cols() != z.cols()) {
        throw ShapeError("adapter weights do not match the input width");
    }
    Tensor inner = ad::gelu(ad::matmul(z, p.w1));
    Tensor mid = ad::gelu(ad::matmul(inner, p.w2));
    return ad::add(z, ad::matmul(mid, p.w3));
}

}  // namespace gaat::nn
