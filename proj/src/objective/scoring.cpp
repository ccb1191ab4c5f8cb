#include <cmath>

#include "gaat/ad/ops.hpp"
#include "gaat/error.hpp"
#include "gaat/objective.hpp"

namespace gaat::obj {

namespace {

struct Endpoints {
    std::vector<std::int32_t> u, v;
};

Endpoints split_pairs(std::span<const Edge> pairs) {
    Endpoints e;
    e.u.reserve(pairs.size());
    e.v.reserve(pairs.size());
    for (const Edge& p : pairs) {
        e.u.push_back(p.u);
        e.v.push_back(p.v);
    }
    return e;
}

}  // namespace

Tensor link_score(const Tensor& z, std::span<const Edge> pairs, const Tensor& psi) {
    if (psi.rows() != z.cols() || psi.cols() != 1) throw ShapeError("psi must be d x 1 with d the embedding width");
    const Endpoints e = split_pairs(pairs);
    Tensor diff = ad::sub(ad::gather_rows(z, e.u), ad::gather_rows(z, e.v));
    Tensor inner = ad::matmul(ad::square(diff), psi);
    return ad::exp(ad::neg(ad::relu(inner)));
}

Tensor dot_score(const Tensor& z, std::span<const Edge> pairs) {
    const Endpoints e = split_pairs(pairs);
    return ad::sigmoid(ad::row_sum(ad::mul(ad::gather_rows(z, e.u), ad::gather_rows(z, e.v))));
}

double link_score(const Vector& zi, const Vector& zj, const Vector& psi) {
    if (zi.size() != zj.size() || psi.size() != zi.size()) throw ShapeError("link_score: length mismatch");
    const double inner = psi.dot((zi - zj).cwiseAbs2());
    return std::exp(-std::max(inner, 0.0));
}

double dot_score(const Vector& zi, const Vector& zj) {
    if (zi.size() != zj.size()) throw ShapeError("dot_score: length mismatch");
    const double x = zi.dot(zj);
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace gaat::obj
