#pragma once

#include "gaat/graph.hpp"
#include "gaat/matrix.hpp"

namespace gaat::graph {

/// D^{-1/2} A D^{-1/2} as a dense n x n matrix. Degree-0 nodes get zero rows and columns.
Matrix normalized_adjacency(const Graph& g);

/// Iterates X <- (1 - alpha) X_init + alpha S X for `steps` rounds starting from X_init.
/// alpha must lie in [0, 1); alpha = 0 returns X_init unchanged.
Matrix diffuse(const Matrix& x_init, const Matrix& norm_adj, double alpha, int steps);

/// Same iteration with S applied through the adjacency lists (O(m d) per step).
Matrix diffuse(const Matrix& x_init, const Graph& g, double alpha, int steps);

}  // namespace gaat::graph
