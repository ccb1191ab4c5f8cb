#pragma once

#include <span>
#include <vector>

#include "gaat/ad/tensor.hpp"
#include "gaat/graph.hpp"

namespace gaat::obj {

using ad::Tensor;
using graph::Edge;

/// exp(-relu(psi . (z_u - z_v)^2)) for every pair; z is n x d, psi is d x 1. Result E x 1.
Tensor link_score(const Tensor& z, std::span<const Edge> pairs, const Tensor& psi);
/// sigmoid(z_u . z_v) for every pair. Result E x 1.
Tensor dot_score(const Tensor& z, std::span<const Edge> pairs);

double link_score(const Vector& zi, const Vector& zj, const Vector& psi);
double dot_score(const Vector& zi, const Vector& zj);

/// Mean binary cross-entropy with scores clamped to [1e-12, 1 - 1e-12].
Tensor link_loss(const Tensor& scores, std::span<const double> labels);

enum class Denominator { per_anchor, global };

/// InfoNCE over cosine similarities of z rows at temperature tau.
/// per_anchor: a positive (u, v) competes against every candidate edge incident to u.
/// global: every positive competes against all candidates.
/// Every positive must also appear among the candidates.
Tensor contrastive_loss(const Tensor& z, std::span<const Edge> positives, std::span<const Edge> candidates, double tau,
                        Denominator denominator = Denominator::per_anchor);

Tensor total_loss(const Tensor& link, const Tensor& contrastive, double lambda);

/// Probability that a random positive outscores a random negative (ties count 1/2).
double auc(std::span<const double> scores, std::span<const double> labels);
/// F1 of the predictions score > theta; 0 when precision + recall is 0.
double f1(std::span<const double> scores, std::span<const double> labels, double theta = 0.5);
/// Average precision over the descending-score ranking; ties keep input order.
double average_precision(std::span<const double> scores, std::span<const double> labels);

struct Metrics {
    double auc = 0.0;
    double f1 = 0.0;
    double ap = 0.0;
};

Metrics evaluate_scores(std::span<const double> scores, std::span<const double> labels);

}  // namespace gaat::obj
