#include "gaat/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "gaat/error.hpp"

namespace gaat::graph {

std::string to_string(SplitName s) {
    switch (s) {
        case SplitName::train: return "train";
        case SplitName::val: return "val";
        case SplitName::test: return "test";
    }
    return "?";
}

SplitName parse_split_name(std::string_view s) {
    if (s == "train") return SplitName::train;
    if (s == "val") return SplitName::val;
    if (s == "test") return SplitName::test;
    throw InputError("unknown split name '" + std::string(s) + "'");
}

const std::vector<Edge>& EdgeSplit::positives(SplitName s) const {
    switch (s) {
        case SplitName::train: return train_pos;
        case SplitName::val: return val_pos;
        default: return test_pos;
    }
}

const std::vector<Edge>& EdgeSplit::negatives(SplitName s) const {
    switch (s) {
        case SplitName::train: return train_neg;
        case SplitName::val: return val_neg;
        default: return test_neg;
    }
}

std::vector<Edge>& EdgeSplit::positives(SplitName s) {
    return const_cast<std::vector<Edge>&>(std::as_const(*this).positives(s));
}

std::vector<Edge>& EdgeSplit::negatives(SplitName s) {
    return const_cast<std::vector<Edge>&>(std::as_const(*this).negatives(s));
}

std::array<std::size_t, 3> partition_sizes(std::size_t m, std::array<std::size_t, 3> ratios) {
    const std::size_t total = ratios[0] + ratios[1] + ratios[2];
    if (total == 0) throw std::invalid_argument("split ratios sum to zero");
    std::array<std::size_t, 3> sizes{};
    std::array<std::size_t, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        sizes[k] = m * ratios[k] / total;
        remainder[k] = m * ratios[k] % total;
        assigned += sizes[k];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < m; ++k, ++assigned) ++sizes[order[k % 3]];
    return sizes;
}

namespace {

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace

EdgeSplit split_edges(const Graph& g, std::array<std::size_t, 3> ratios, std::uint64_t seed, Graph* train_view) {
    const std::size_t m = g.num_edges();
    if (m < 10) throw DegenerateGraphError("split needs at least 10 edges, graph has " + std::to_string(m));
    const auto sizes = partition_sizes(m, ratios);
    if (sizes[0] == 0 || sizes[1] == 0 || sizes[2] == 0) {
        throw DegenerateGraphError("graph too small to populate train/val/test");
    }

    std::vector<Edge> edges = g.edges();
    Rng rng(substream_seed(seed, "split"));
    shuffle(edges, rng);

    EdgeSplit split;
    split.seed = seed;
    const auto b0 = edges.begin();
    const auto b1 = b0 + static_cast<std::ptrdiff_t>(sizes[0]);
    const auto b2 = b1 + static_cast<std::ptrdiff_t>(sizes[1]);
    split.train_pos.assign(b0, b1);
    split.val_pos.assign(b1, b2);
    split.test_pos.assign(b2, edges.end());

    if (train_view != nullptr) *train_view = Graph(g.num_nodes(), split.train_pos);
    return split;
}

std::vector<Edge> sample_negatives(const Graph& g, std::size_t count, std::span<const Edge> exclude, std::uint64_t seed) {
    const std::size_t n = g.num_nodes();
    std::unordered_set<std::uint64_t> blocked;
    blocked.reserve(exclude.size() * 2 + count * 2);
    std::size_t extra_blocked = 0;
    for (const Edge& e : exclude) {
        const Edge c = make_edge(e.u, e.v);
        if (c.u == c.v || g.has_edge(c.u, c.v)) continue;
        if (blocked.insert(edge_key(c)).second) ++extra_blocked;
    }
    const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
    const std::size_t available = pairs - g.num_edges() - extra_blocked;
    if (count > available) {
        throw SamplingError("cannot sample " + std::to_string(count) + " negatives; only " +
                            std::to_string(available) + " non-edges available");
    }

    Rng rng(substream_seed(seed, "negatives"));
    std::vector<Edge> out;
    out.reserve(count);
    if (count * 2 <= available) {
        // Sparse regime: rejection sampling over uniform unordered pairs.
        while (out.size() < count) {
            const auto a = static_cast<NodeId>(uniform_index(rng, n));
            const auto b = static_cast<NodeId>(uniform_index(rng, n));
            if (a == b || g.has_edge(a, b)) continue;
            const Edge e = make_edge(a, b);
            if (blocked.insert(edge_key(e)).second) out.push_back(e);
        }
    } else {
        std::vector<Edge> candidates;
        candidates.reserve(available);
        for (NodeId a = 0; static_cast<std::size_t>(a) < n; ++a) {
            for (NodeId b = a + 1; static_cast<std::size_t>(b) < n; ++b) {
                if (!g.has_edge(a, b) && !blocked.contains(edge_key(Edge{a, b}))) candidates.push_back(Edge{a, b});
            }
        }
        // Partial Fisher-Yates: the first `count` slots are a uniform sample.
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + uniform_index(rng, candidates.size() - i);
            std::swap(candidates[i], candidates[j]);
        }
        out.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count));
    }
    return out;
}

LinkTask make_link_task(const Graph& g, double neg_ratio, std::uint64_t seed, std::array<std::size_t, 3> ratios) {
    if (!(neg_ratio > 0.0)) throw std::invalid_argument("negative ratio must be positive");
    LinkTask task;
    task.full = g;
    task.split = split_edges(g, ratios, seed, &task.train_view);
    task.split.neg_ratio = neg_ratio;

    std::vector<Edge> drawn;
    auto draw = [&](const std::vector<Edge>& pos, std::string_view name) {
        const auto count = static_cast<std::size_t>(std::llround(neg_ratio * static_cast<double>(pos.size())));
        auto neg = sample_negatives(g, count, drawn, substream_seed(seed, name));
        drawn.insert(drawn.end(), neg.begin(), neg.end());
        return neg;
    };
    task.split.train_neg = draw(task.split.train_pos, "neg.train");
    task.split.val_neg = draw(task.split.val_pos, "neg.val");
    task.split.test_neg = draw(task.split.test_pos, "neg.test");
    return task;
}

LinkTask make_link_task(const Graph& g, EdgeSplit split) {
    LinkTask task;
    task.full = g;
    for (SplitName s : {SplitName::train, SplitName::val, SplitName::test}) {
        for (const Edge& e : split.positives(s)) {
            if (!g.has_edge(e.u, e.v)) throw InputError("split positive is not an edge of the graph");
        }
        for (const Edge& e : split.negatives(s)) {
            if (g.has_edge(e.u, e.v)) throw InputError("split negative is an edge of the graph");
        }
    }
    if (split.train_pos.size() + split.val_pos.size() + split.test_pos.size() != g.num_edges()) {
        throw InputError("split positives do not cover the graph's edge set");
    }
    task.train_view = Graph(g.num_nodes(), split.train_pos);
    task.split = std::move(split);
    return task;
}

std::string format_manifest(const EdgeSplit& split, std::span<const std::int64_t> ids) {
    auto id = [&](NodeId v) -> std::int64_t { return ids.empty() ? v : ids[static_cast<std::size_t>(v)]; };
    std::ostringstream out;
    out << "src dst split label\n";
    for (SplitName s : {SplitName::train, SplitName::val, SplitName::test}) {
        for (const Edge& e : split.positives(s)) out << id(e.u) << ' ' << id(e.v) << ' ' << to_string(s) << " 1\n";
        for (const Edge& e : split.negatives(s)) out << id(e.u) << ' ' << id(e.v) << ' ' << to_string(s) << " 0\n";
    }
    return out.str();
}

void write_manifest(const std::filesystem::path& path, const EdgeSplit& split, std::span<const std::int64_t> ids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write manifest: " + path.string());
    out << format_manifest(split, ids);
}

EdgeSplit read_manifest(const std::filesystem::path& path, const std::unordered_map<std::int64_t, NodeId>* to_internal) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read manifest: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty manifest: " + path.string());
    {
        std::istringstream hs(line);
        std::string a, b, c, d;
        hs >> a >> b >> c >> d;
        if (a != "src" || b != "dst" || c != "split" || d != "label") {
            throw InputError("manifest header must be 'src dst split label'");
        }
    }
    auto map_id = [&](std::int64_t v) -> NodeId {
        if (to_internal == nullptr) return static_cast<NodeId>(v);
        auto it = to_internal->find(v);
        if (it == to_internal->end()) throw InputError("manifest node id " + std::to_string(v) + " not in graph");
        return it->second;
    };

    EdgeSplit split;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::int64_t src = 0, dst = 0;
        std::string name;
        int label = -1;
        if (!(ls >> src >> dst >> name >> label) || (label != 0 && label != 1)) {
            throw InputError("manifest line " + std::to_string(line_no) + " is malformed");
        }
        const Edge e = make_edge(map_id(src), map_id(dst));
        const SplitName s = parse_split_name(name);
        (label == 1 ? split.positives(s) : split.negatives(s)).push_back(e);
    }
    if (!split.train_pos.empty()) {
        split.neg_ratio = static_cast<double>(split.train_neg.size()) / static_cast<double>(split.train_pos.size());
    }
    return split;
}

}  // namespace gaat::graph
