#include <stdexcept>
#include <unordered_map>

#include "gaat/ad/ops.hpp"
#include "gaat/error.hpp"
#include "gaat/objective.hpp"

namespace gaat::obj {

Tensor link_loss(const Tensor& scores, std::span<const double> labels) {
    return ad::binary_cross_entropy(scores, labels, 1e-12);
}

Tensor contrastive_loss(const Tensor& z, std::span<const Edge> positives, std::span<const Edge> candidates, double tau,
                        Denominator denominator) {
    if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (positives.empty()) throw ShapeError("contrastive_loss: no positive edges");

    std::unordered_map<std::uint64_t, std::int32_t> position;
    position.reserve(candidates.size());
    std::vector<std::int32_t> cu, cv;
    cu.reserve(candidates.size());
    cv.reserve(candidates.size());
    for (const Edge& c : candidates) {
        position.emplace(graph::edge_key(c), static_cast<std::int32_t>(cu.size()));
        cu.push_back(c.u);
        cv.push_back(c.v);
    }
    std::vector<std::int32_t> pos_index, pos_anchor;
    pos_index.reserve(positives.size());
    pos_anchor.reserve(positives.size());
    for (const Edge& p : positives) {
        const auto it = position.find(graph::edge_key(p));
        if (it == position.end()) throw std::invalid_argument("contrastive_loss: positive edge missing from candidates");
        pos_index.push_back(it->second);
        pos_anchor.push_back(p.u);
    }

    Tensor unit = ad::row_normalize(z, 1e-12);
    Tensor sims = ad::scale(ad::row_sum(ad::mul(ad::gather_rows(unit, cu), ad::gather_rows(unit, cv))), 1.0 / tau);
    Tensor pos_sims = ad::gather_rows(sims, pos_index);

    Tensor lse;
    if (denominator == Denominator::per_anchor) {
        // Each candidate edge counts toward both of its endpoints.
        const auto e = static_cast<std::int32_t>(cu.size());
        std::vector<std::int32_t> twice(2 * cu.size()), segment(2 * cu.size());
        for (std::int32_t k = 0; k < e; ++k) {
            twice[k] = twice[e + k] = k;
            segment[k] = cu[k];
            segment[e + k] = cv[k];
        }
        Tensor per_node = ad::segment_logsumexp(ad::gather_rows(sims, twice), segment, static_cast<std::int32_t>(z.rows()));
        lse = ad::gather_rows(per_node, pos_anchor);
    } else {
        std::vector<std::int32_t> all(cu.size(), 0);
        Tensor total = ad::segment_logsumexp(sims, all, 1);
        lse = ad::gather_rows(total, std::vector<std::int32_t>(positives.size(), 0));
    }
    return ad::mean(ad::sub(lse, pos_sims));
}

Tensor total_loss(const Tensor& link, const Tensor& contrastive, double lambda) {
    if (lambda == 0.0) return link;
    return ad::add(link, ad::scale(contrastive, lambda));
}

}  // namespace gaat::obj
