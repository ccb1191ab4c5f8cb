#pragma once

#include <vector>

#include "gaat/graph.hpp"

namespace gaat::graph {

/// Per-node samples drawn from the exact g-hop frontiers for g in `hops`.
struct DistantSampleTable {
    std::vector<int> hops;
    std::size_t per_node = 0;
    std::vector<std::vector<NodeId>> samples;
};

/// For every node, up to `per_node` ids drawn uniformly without replacement from the
/// union of its exact-hop frontiers. Nodes with no such neighbor get an empty list.
DistantSampleTable build_distant_table(const Graph& g, const std::vector<int>& hops, std::size_t per_node,
                                       std::uint64_t seed);

}  // namespace gaat::graph
