#include "gaat/ad/sparse_ops.hpp"

#include <algorithm>
#include <cmath>

#include "gaat/error.hpp"

namespace gaat::ad {

namespace {

void finalize_rows(Csr& csr) {
    csr.rows.resize(csr.cols.size());
    for (std::int32_t i = 0; i < csr.num_rows; ++i) {
        std::fill(csr.rows.begin() + csr.offsets[i], csr.rows.begin() + csr.offsets[i + 1], i);
    }
}

}  // namespace

Csr attention_pattern(const graph::Graph& g) {
    Csr csr;
    csr.num_rows = csr.num_cols = static_cast<std::int32_t>(g.num_nodes());
    csr.offsets.reserve(g.num_nodes() + 1);
    csr.offsets.push_back(0);
    csr.cols.reserve(2 * g.num_edges() + g.num_nodes());
    for (std::int32_t i = 0; i < csr.num_rows; ++i) {
        bool self_done = false;
        for (const auto j : g.neighbors(i)) {
            if (!self_done && j > i) {
                csr.cols.push_back(i);
                self_done = true;
            }
            csr.cols.push_back(j);
        }
        if (!self_done) csr.cols.push_back(i);
        csr.offsets.push_back(static_cast<std::int32_t>(csr.cols.size()));
    }
    finalize_rows(csr);
    return csr;
}

WeightedCsr distant_mean_operator(const graph::DistantSampleTable& table) {
    WeightedCsr m;
    Csr& csr = m.pattern;
    csr.num_rows = csr.num_cols = static_cast<std::int32_t>(table.samples.size());
    csr.offsets.push_back(0);
    for (const auto& list : table.samples) {
        const double w = list.empty() ? 0.0 : 1.0 / static_cast<double>(list.size());
        for (const auto j : list) {
            csr.cols.push_back(j);
            m.weights.push_back(w);
        }
        csr.offsets.push_back(static_cast<std::int32_t>(csr.cols.size()));
    }
    finalize_rows(csr);
    return m;
}

Tensor edge_logits(const Tensor& src, const Tensor& dst, const Csr& csr) {
    if (src.rows() != csr.num_rows || dst.rows() != csr.num_cols || src.cols() != 1 || dst.cols() != 1) {
        throw ShapeError("edge_logits: inputs must be n x 1 and match the pattern");
    }
    Matrix out(static_cast<Eigen::Index>(csr.nnz()), 1);
    for (std::size_t k = 0; k < csr.nnz(); ++k) {
        out(static_cast<Eigen::Index>(k), 0) = src.value()(csr.rows[k], 0) + dst.value()(csr.cols[k], 0);
    }
    return make_result(std::move(out), {src, dst}, "edge_logits", [&csr](Node& self) {
        if (self.inputs[0]->requires_grad) {
            Matrix& g = self.inputs[0]->grad_buffer();
            for (std::size_t k = 0; k < csr.nnz(); ++k) g(csr.rows[k], 0) += self.grad(static_cast<Eigen::Index>(k), 0);
        }
        if (self.inputs[1]->requires_grad) {
            Matrix& g = self.inputs[1]->grad_buffer();
            for (std::size_t k = 0; k < csr.nnz(); ++k) g(csr.cols[k], 0) += self.grad(static_cast<Eigen::Index>(k), 0);
        }
    });
}

Tensor edge_softmax(const Tensor& logits, const Csr& csr) {
    if (logits.rows() != static_cast<Eigen::Index>(csr.nnz()) || logits.cols() != 1) {
        throw ShapeError("edge_softmax: logits must be nnz x 1");
    }
    Matrix out(logits.rows(), 1);
    const Matrix& x = logits.value();
    for (std::int32_t i = 0; i < csr.num_rows; ++i) {
        const auto lo = csr.offsets[i], hi = csr.offsets[i + 1];
        if (lo == hi) continue;
        const double m = x.col(0).segment(lo, hi - lo).maxCoeff();
        double total = 0.0;
        for (auto k = lo; k < hi; ++k) total += (out(k, 0) = std::exp(x(k, 0) - m));
        for (auto k = lo; k < hi; ++k) out(k, 0) /= total;
    }
    return make_result(std::move(out), {logits}, "edge_softmax", [&csr](Node& self) {
        Matrix g(self.value.rows(), 1);
        for (std::int32_t i = 0; i < csr.num_rows; ++i) {
            const auto lo = csr.offsets[i], hi = csr.offsets[i + 1];
            double dot = 0.0;
            for (auto k = lo; k < hi; ++k) dot += self.value(k, 0) * self.grad(k, 0);
            for (auto k = lo; k < hi; ++k) g(k, 0) = self.value(k, 0) * (self.grad(k, 0) - dot);
        }
        self.inputs[0]->accumulate(g);
    });
}

Tensor spmm_weighted(const Tensor& weight, const Tensor& h, const Csr& csr) {
    if (weight.rows() != static_cast<Eigen::Index>(csr.nnz()) || weight.cols() != 1 || h.rows() != csr.num_cols) {
        throw ShapeError("spmm_weighted: operands do not match the pattern");
    }
    Matrix out = Matrix::Zero(csr.num_rows, h.cols());
    for (std::size_t k = 0; k < csr.nnz(); ++k) {
        out.row(csr.rows[k]) += weight.value()(static_cast<Eigen::Index>(k), 0) * h.value().row(csr.cols[k]);
    }
    return make_result(std::move(out), {weight, h}, "spmm_weighted", [&csr](Node& self) {
        Node& w = *self.inputs[0];
        Node& hn = *self.inputs[1];
        if (w.requires_grad) {
            Matrix& g = w.grad_buffer();
            for (std::size_t k = 0; k < csr.nnz(); ++k) {
                g(static_cast<Eigen::Index>(k), 0) += hn.value.row(csr.cols[k]).dot(self.grad.row(csr.rows[k]));
            }
        }
        if (hn.requires_grad) {
            Matrix& g = hn.grad_buffer();
            for (std::size_t k = 0; k < csr.nnz(); ++k) {
                g.row(csr.cols[k]) += w.value(static_cast<Eigen::Index>(k), 0) * self.grad.row(csr.rows[k]);
            }
        }
    });
}

Tensor spmm_const(const WeightedCsr& m, const Tensor& h) {
    const Csr& csr = m.pattern;
    if (h.rows() != csr.num_cols) throw ShapeError("spmm_const: operand rows do not match the pattern");
    Matrix out = Matrix::Zero(csr.num_rows, h.cols());
    for (std::size_t k = 0; k < csr.nnz(); ++k) out.row(csr.rows[k]) += m.weights[k] * h.value().row(csr.cols[k]);
    return make_result(std::move(out), {h}, "spmm_const", [&m](Node& self) {
        const Csr& p = m.pattern;
        Matrix& g = self.inputs[0]->grad_buffer();
        for (std::size_t k = 0; k < p.nnz(); ++k) g.row(p.cols[k]) += m.weights[k] * self.grad.row(p.rows[k]);
    });
}

}  // namespace gaat::ad
