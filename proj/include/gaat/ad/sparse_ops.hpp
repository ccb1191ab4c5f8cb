#pragma once

#include <cstdint>
#include <vector>

#include "gaat/ad/tensor.hpp"
#include "gaat/distant.hpp"
#include "gaat/graph.hpp"

namespace gaat::ad {

/// Row-compressed sparsity pattern. Ops below keep a reference to the pattern, so it
/// must outlive any backward pass through their results.
/// Entry k links row rows[k] to column cols[k].
/// Entries of a row are contiguous in [offsets[i], offsets[i + 1]).
struct Csr {
    std::int32_t num_rows = 0;
    std::int32_t num_cols = 0;
    std::vector<std::int32_t> offsets;
    std::vector<std::int32_t> rows;
    std::vector<std::int32_t> cols;

    std::size_t nnz() const { return cols.size(); }
};

/// Pattern N(i) ∪ {i} for every node, columns ascending.
Csr attention_pattern(const graph::Graph& g);

/// Fixed-weight sparse matrix used as a constant operand.
struct WeightedCsr {
    Csr pattern;
    std::vector<double> weights;
};

/// Row i averages the sampled distant neighbors of node i; empty rows stay zero.
WeightedCsr distant_mean_operator(const graph::DistantSampleTable& table);

/// e_k = src(rows[k]) + dst(cols[k]) for n x 1 inputs; result is nnz x 1.
Tensor edge_logits(const Tensor& src, const Tensor& dst, const Csr& csr);

/// Softmax of nnz x 1 logits within each row of the pattern.
Tensor edge_softmax(const Tensor& logits, const Csr& csr);

/// out_i = sum_k weight_k h_{cols[k]} over the entries of row i; weight is nnz x 1.
Tensor spmm_weighted(const Tensor& weight, const Tensor& h, const Csr& csr);

/// Constant sparse matrix times h.
Tensor spmm_const(const WeightedCsr& m, const Tensor& h);

}  // namespace gaat::ad
