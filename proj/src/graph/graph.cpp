#include "gaat/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "gaat/error.hpp"

namespace gaat::graph {

Graph::Graph(std::size_t num_nodes, std::span<const Edge> edges) : adjacency_(num_nodes) {
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (const Edge& e : edges) {
        if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= num_nodes ||
            static_cast<std::size_t>(e.v) >= num_nodes) {
            throw InputError("edge endpoint out of range: (" + std::to_string(e.u) + ", " +
                             std::to_string(e.v) + ") with n=" + std::to_string(num_nodes));
        }
        if (e.u == e.v) {
            ++dropped_self_loops_;
            continue;
        }
        canon.push_back(make_edge(e.u, e.v));
    }
    std::sort(canon.begin(), canon.end());
    const auto last = std::unique(canon.begin(), canon.end());
    dropped_duplicates_ = static_cast<std::size_t>(canon.end() - last);
    canon.erase(last, canon.end());
    edges_ = std::move(canon);

    for (const Edge& e : edges_) {
        adjacency_[static_cast<std::size_t>(e.u)].push_back(e.v);
        adjacency_[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> out(adjacency_.size());
    for (std::size_t i = 0; i < adjacency_.size(); ++i) out[i] = adjacency_[i].size();
    return out;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= num_nodes() || static_cast<std::size_t>(b) >= num_nodes()) {
        return false;
    }
    const auto& nbrs = adjacency_[static_cast<std::size_t>(a)];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

Graph Graph::without_edges(std::span<const Edge> removed) const {
    std::unordered_set<std::uint64_t> drop;
    drop.reserve(removed.size() * 2);
    for (const Edge& e : removed) drop.insert(edge_key(make_edge(e.u, e.v)));
    std::vector<Edge> kept;
    kept.reserve(edges_.size());
    for (const Edge& e : edges_) {
        if (!drop.contains(edge_key(e))) kept.push_back(e);
    }
    return Graph(num_nodes(), kept);
}

namespace {

std::int64_t parse_id(std::string_view token, std::size_t line_no) {
    std::int64_t value = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InputError("line " + std::to_string(line_no) + ": non-integer token '" + std::string(token) + "'");
    }
    return value;
}

}  // namespace

LoadedGraph parse_edge_list(std::string_view text) {
    LoadedGraph out;
    std::vector<Edge> raw;
    auto intern = [&](std::int64_t id) {
        auto [it, inserted] = out.internal_ids.try_emplace(id, static_cast<NodeId>(out.original_ids.size()));
        if (inserted) out.original_ids.push_back(id);
        return it->second;
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) tokens.push_back(line.substr(i, j - i));
            i = j;
        }
        if (tokens.empty()) continue;
        if (tokens.size() != 2) {
            throw InputError("line " + std::to_string(line_no) + ": expected two tokens, found " +
                             std::to_string(tokens.size()));
        }
        const std::int64_t a = parse_id(tokens[0], line_no);
        const std::int64_t b = parse_id(tokens[1], line_no);
        const NodeId ia = intern(a);
        const NodeId ib = intern(b);
        raw.push_back(Edge{ia, ib});
    }

    out.graph = Graph(out.original_ids.size(), raw);
    out.dropped_self_loops = out.graph.dropped_self_loops();
    out.dropped_duplicates = out.graph.dropped_duplicates();
    if (out.graph.num_edges() == 0) throw DegenerateGraphError("edge list contains no usable edge");
    if (out.dropped_self_loops > 0 || out.dropped_duplicates > 0) {
        std::cerr << "warning: dropped " << out.dropped_self_loops << " self-loop(s) and " << out.dropped_duplicates
                  << " duplicate edge(s)\n";
    }
    return out;
}

LoadedGraph load_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read edge list: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw InputError("read failure: " + path.string());
    return parse_edge_list(buf.str());
}

void write_edge_list(const std::filesystem::path& path, std::span<const Edge> edges) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write edge list: " + path.string());
    for (const Edge& e : edges) out << e.u << ' ' << e.v << '\n';
}

double density(const Graph& g) {
    const auto n = static_cast<double>(g.num_nodes());
    if (g.num_nodes() < 2) throw DegenerateGraphError("density requires at least two nodes");
    return 2.0 * static_cast<double>(g.num_edges()) * 1e3 / (n * (n - 1.0));
}

std::vector<int> bfs_distances(const Graph& g, NodeId source) {
    std::vector<int> dist(g.num_nodes(), -1);
    std::queue<NodeId> frontier;
    dist[static_cast<std::size_t>(source)] = 0;
    frontier.push(source);
    while (!frontier.empty()) {
        const NodeId v = frontier.front();
        frontier.pop();
        for (NodeId w : g.neighbors(v)) {
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                frontier.push(w);
            }
        }
    }
    return dist;
}

std::vector<NodeId> exact_khop(const Graph& g, NodeId node, int k) {
    if (k < 1) throw std::invalid_argument("exact_khop requires k >= 1");
    // Level-synchronous BFS that stops at depth k.
    std::vector<char> seen(g.num_nodes(), 0);
    std::vector<NodeId> level{node};
    seen[static_cast<std::size_t>(node)] = 1;
    for (int depth = 0; depth < k && !level.empty(); ++depth) {
        std::vector<NodeId> next;
        for (NodeId v : level) {
            for (NodeId w : g.neighbors(v)) {
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    next.push_back(w);
                }
            }
        }
        level = std::move(next);
    }
    std::sort(level.begin(), level.end());
    return level;
}

std::vector<std::size_t> sbm_blocks(std::size_t n, std::size_t blocks) {
    if (blocks == 0) throw std::invalid_argument("sbm needs at least one block");
    const std::size_t size = n / blocks;
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::min(size == 0 ? 0 : i / size, blocks - 1);
    return out;
}

Graph stochastic_block_model(std::size_t n, std::size_t blocks, double p_in, double p_out, std::uint64_t seed) {
    const auto block = sbm_blocks(n, blocks);
    Rng rng(substream_seed(seed, "sbm"));
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = block[i] == block[j] ? p_in : p_out;
            if (uniform01(rng) < p) edges.push_back(Edge{static_cast<NodeId>(i), static_cast<NodeId>(j)});
        }
    }
    return Graph(n, edges);
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) { return stochastic_block_model(n, 1, p, p, seed); }

}  // namespace gaat::graph
