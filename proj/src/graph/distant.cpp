#include "gaat/distant.hpp"

#include <algorithm>
#include <stdexcept>

namespace gaat::graph {

DistantSampleTable build_distant_table(const Graph& g, const std::vector<int>& hops, std::size_t per_node,
                                       std::uint64_t seed) {
    if (per_node < 1) throw std::invalid_argument("distant sampling needs per_node >= 1");
    if (hops.empty()) throw std::invalid_argument("distant sampling needs at least one hop distance");
    const int max_hop = *std::max_element(hops.begin(), hops.end());
    if (*std::min_element(hops.begin(), hops.end()) < 1) throw std::invalid_argument("hop distances must be >= 1");

    DistantSampleTable table;
    table.hops = hops;
    table.per_node = per_node;
    table.samples.resize(g.num_nodes());

    std::vector<int> depth(g.num_nodes(), -1);
    std::vector<NodeId> touched;
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
        // Truncated BFS to depth max_hop; `touched` records visited nodes in BFS order.
        touched.clear();
        depth[v] = 0;
        touched.push_back(static_cast<NodeId>(v));
        for (std::size_t head = 0; head < touched.size(); ++head) {
            const NodeId x = touched[head];
            if (depth[static_cast<std::size_t>(x)] == max_hop) continue;
            for (NodeId w : g.neighbors(x)) {
                if (depth[static_cast<std::size_t>(w)] < 0) {
                    depth[static_cast<std::size_t>(w)] = depth[static_cast<std::size_t>(x)] + 1;
                    touched.push_back(w);
                }
            }
        }
        std::vector<NodeId> pool;
        for (NodeId x : touched) {
            if (std::find(hops.begin(), hops.end(), depth[static_cast<std::size_t>(x)]) != hops.end()) pool.push_back(x);
        }
        for (NodeId x : touched) depth[static_cast<std::size_t>(x)] = -1;

        std::sort(pool.begin(), pool.end());
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(v)));
        const std::size_t take = std::min(per_node, pool.size());
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + uniform_index(rng, pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(take);
        table.samples[v] = std::move(pool);
    }
    return table;
}

}  // namespace gaat::graph
