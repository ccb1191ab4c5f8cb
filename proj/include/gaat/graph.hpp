#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gaat/rng.hpp"

namespace gaat::graph {

using NodeId = std::int32_t;

/// Unordered node pair, stored with first < second.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline std::uint64_t edge_key(const Edge& e) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.u)) << 32) |
           static_cast<std::uint32_t>(e.v);
}

/// Immutable undirected simple graph. Node ids are 0..n-1; neighbor lists are sorted.
class Graph {
public:
    Graph() = default;

    /// Builds from an edge list. Self-loops and duplicates are dropped; the
    /// number of each dropped kind is available afterwards.
    Graph(std::size_t num_nodes, std::span<const Edge> edges);

    std::size_t num_nodes() const { return adjacency_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    /// Canonical (u < v) edges in ascending order.
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[static_cast<std::size_t>(v)]; }
    std::size_t degree(NodeId v) const { return adjacency_[static_cast<std::size_t>(v)].size(); }
    std::vector<std::size_t> degrees() const;

    bool has_edge(NodeId a, NodeId b) const;

    std::size_t dropped_self_loops() const { return dropped_self_loops_; }
    std::size_t dropped_duplicates() const { return dropped_duplicates_; }

    /// Copy of this graph with the listed edges removed (same node set).
    Graph without_edges(std::span<const Edge> removed) const;

private:
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<Edge> edges_;
    std::size_t dropped_self_loops_ = 0;
    std::size_t dropped_duplicates_ = 0;
};

/// Graph read from an edge-list file, plus the mapping back to file ids.
struct LoadedGraph {
    Graph graph;
    std::vector<std::int64_t> original_ids;  // internal id -> file id
    std::unordered_map<std::int64_t, NodeId> internal_ids;
    std::size_t dropped_self_loops = 0;
    std::size_t dropped_duplicates = 0;
};

/// Reads whitespace-separated integer pairs, one edge per line; `#` starts a comment.
/// Ids are reindexed contiguously in order of first appearance.
/// Throws InputError on I/O failure or malformed tokens, DegenerateGraphError when no edge survives.
LoadedGraph load_edge_list(const std::filesystem::path& path);
LoadedGraph parse_edge_list(std::string_view text);

void write_edge_list(const std::filesystem::path& path, std::span<const Edge> edges);

/// 2m * 10^3 / (n (n - 1)).
double density(const Graph& g);

/// Nodes at shortest-path distance exactly k from `node`, ascending.
std::vector<NodeId> exact_khop(const Graph& g, NodeId node, int k);

/// All BFS distances from `source` (-1 for unreachable).
std::vector<int> bfs_distances(const Graph& g, NodeId source);

/// Stochastic block model with equal-sized blocks (the last block absorbs the remainder).
Graph stochastic_block_model(std::size_t n, std::size_t blocks, double p_in, double p_out, std::uint64_t seed);

/// Block index of each node for the layout used by stochastic_block_model.
std::vector<std::size_t> sbm_blocks(std::size_t n, std::size_t blocks);

/// G(n, p) random graph.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

}  // namespace gaat::graph
