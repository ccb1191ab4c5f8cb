#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "gaat/graph.hpp"
#include "gaat/matrix.hpp"
#include "gaat/rng.hpp"

namespace gaat::test {

inline graph::Graph from_pairs(std::size_t n, std::initializer_list<std::pair<int, int>> pairs) {
    std::vector<graph::Edge> edges;
    for (auto [a, b] : pairs) edges.push_back(graph::make_edge(a, b));
    return graph::Graph(n, edges);
}

inline graph::Graph path_graph(std::size_t n) {
    std::vector<graph::Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back(graph::make_edge(int(i), int(i + 1)));
    return graph::Graph(n, edges);
}

inline graph::Graph cycle_graph(std::size_t n) {
    std::vector<graph::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) edges.push_back(graph::make_edge(int(i), int((i + 1) % n)));
    return graph::Graph(n, edges);
}

inline graph::Graph complete_graph(std::size_t n) {
    std::vector<graph::Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back(graph::make_edge(int(i), int(j)));
    return graph::Graph(n, edges);
}

/// Connected random graph: a random spanning tree plus G(n, p) extras.
inline graph::Graph random_connected(std::size_t n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<graph::Edge> edges;
    for (std::size_t i = 1; i < n; ++i) edges.push_back(graph::make_edge(int(i), int(uniform_index(rng, i))));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (uniform01(rng) < p) edges.push_back(graph::make_edge(int(i), int(j)));
    return graph::Graph(n, edges);
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * uniform01(rng);
    return m;
}

inline std::set<graph::Edge> as_set(const std::vector<graph::Edge>& edges) { return {edges.begin(), edges.end()}; }

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::equal(a.data(), a.data() + a.size(), b.data(), [](double x, double y) {
               return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
           });
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("gaat_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace gaat::test
