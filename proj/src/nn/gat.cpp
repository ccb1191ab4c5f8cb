#include "gaat/nn/gat.hpp"

#include <vector>

#include "gaat/ad/ops.hpp"
#include "gaat/error.hpp"

namespace gaat::nn {

namespace {

struct HeadPass {
    Tensor h;
    Tensor alpha;
};

HeadPass run_head(const Tensor& x, const GatHead& head, const Csr& pattern, double slope) {
    const Eigen::Index width = head.weight.cols();
    if (head.attn.rows() != 2 * width || head.attn.cols() != 1) {
        throw ShapeError("attention vector must be " + std::to_string(2 * width) + " x 1");
    }
    Tensor h = ad::matmul(x, head.weight);
    Tensor src = ad::matmul(h, ad::slice_rows(head.attn, 0, width));
    Tensor dst = ad::matmul(h, ad::slice_rows(head.attn, width, width));
    Tensor logits = ad::leaky_relu(ad::edge_logits(src, dst, pattern), slope);
    return {h, ad::edge_softmax(logits, pattern)};
}

Tensor head_output(const Tensor& x, const GatHead& head, const Csr& pattern) {
    HeadPass pass = run_head(x, head, pattern, 0.2);
    return ad::elu(ad::spmm_weighted(pass.alpha, pass.h, pattern));
}

}  // namespace

Tensor gat_attention(const Tensor& x, const GatHead& head, const Csr& pattern, double slope) {
    return run_head(x, head, pattern, slope).alpha;
}

Tensor gat_forward(const Tensor& x, std::span<const GatHead> heads, const Csr& pattern, HeadMerge merge,
                   double dropout, bool train, Rng& rng) {
    if (heads.empty()) throw ShapeError("gat_forward needs at least one head");
    std::vector<Tensor> outs;
    outs.reserve(heads.size());
    for (const GatHead& head : heads) outs.push_back(head_output(x, head, pattern));
    Tensor merged;
    if (outs.size() == 1) {
        merged = outs[0];
    } else if (merge == HeadMerge::concat) {
        merged = ad::concat_cols(outs);
    } else {
        merged = outs[0];
        for (std::size_t k = 1; k < outs.size(); ++k) merged = ad::add(merged, outs[k]);
        merged = ad::scale(merged, 1.0 / static_cast<double>(outs.size()));
    }
    return ad::dropout(merged, dropout, train, rng);
}

Tensor attention_enhance(const Tensor& x, const GatHead& head, const Csr& pattern) {
    return head_output(x, head, pattern);
}

}  // namespace gaat::nn
