#include "gaat/diffusion.hpp"

#include <cmath>
#include <string>

#include "gaat/error.hpp"

namespace gaat::graph {

namespace {

Vector inverse_sqrt_degrees(const Graph& g) {
    Vector out(static_cast<Eigen::Index>(g.num_nodes()));
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        const auto d = static_cast<double>(g.degree(static_cast<NodeId>(i)));
        out[static_cast<Eigen::Index>(i)] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    return out;
}

void check_diffusion_args(double alpha, int steps) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("diffusion alpha must lie in [0, 1)");
    if (steps < 0) throw std::invalid_argument("diffusion steps must be non-negative");
}

}  // namespace

Matrix normalized_adjacency(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    const Vector s = inverse_sqrt_degrees(g);
    Matrix out = Matrix::Zero(n, n);
    for (const Edge& e : g.edges()) {
        const double w = s[e.u] * s[e.v];
        out(e.u, e.v) = w;
        out(e.v, e.u) = w;
    }
    return out;
}

Matrix diffuse(const Matrix& x_init, const Matrix& norm_adj, double alpha, int steps) {
    check_diffusion_args(alpha, steps);
    if (norm_adj.rows() != norm_adj.cols() || norm_adj.cols() != x_init.rows()) {
        throw ShapeError("diffuse: adjacency " + std::to_string(norm_adj.rows()) + "x" +
                         std::to_string(norm_adj.cols()) + " does not conform with features " +
                         std::to_string(x_init.rows()) + "x" + std::to_string(x_init.cols()));
    }
    Matrix x = x_init;
    if (alpha == 0.0) return x;
    for (int t = 0; t < steps; ++t) {
        Matrix next = (1.0 - alpha) * x_init;
        next.noalias() += alpha * (norm_adj * x);
        x = std::move(next);
    }
    return x;
}

Matrix diffuse(const Matrix& x_init, const Graph& g, double alpha, int steps) {
    check_diffusion_args(alpha, steps);
    if (static_cast<std::size_t>(x_init.rows()) != g.num_nodes()) {
        throw ShapeError("diffuse: feature rows " + std::to_string(x_init.rows()) + " != nodes " +
                         std::to_string(g.num_nodes()));
    }
    Matrix x = x_init;
    if (alpha == 0.0) return x;
    const Vector s = inverse_sqrt_degrees(g);
    Matrix next(x.rows(), x.cols());
    for (int t = 0; t < steps; ++t) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            auto row = next.row(i);
            row = (1.0 - alpha) * x_init.row(i);
            for (NodeId j : g.neighbors(static_cast<NodeId>(i))) row += (alpha * s[i] * s[j]) * x.row(j);
        }
        std::swap(x, next);
    }
    return x;
}

}  // namespace gaat::graph
