#include "gaat/node2vec.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "gaat/error.hpp"

namespace gaat::n2v {

double transition_weight(const Graph& g, NodeId prev, NodeId next, double p, double q) {
    if (next == prev) return 1.0 / p;
    if (g.has_edge(prev, next)) return 1.0;
    return 1.0 / q;
}

WalkCorpus generate_walks(const Graph& g, double p, double q, int walk_length, int walks_per_node, std::uint64_t seed) {
    if (!(p > 0.0) || !(q > 0.0)) throw std::invalid_argument("node2vec p and q must be positive");
    if (walk_length < 2) throw std::invalid_argument("walk length must be at least 2");

    WalkCorpus corpus;
    corpus.num_nodes = g.num_nodes();
    corpus.degrees = g.degrees();
    corpus.walk_length = walk_length;
    corpus.walks_per_node = walks_per_node;
    corpus.p = p;
    corpus.q = q;

    const bool first_order = p == 1.0 && q == 1.0;
    std::vector<double> weights;
    for (int round = 0; round < walks_per_node; ++round) {
        for (std::size_t start = 0; start < g.num_nodes(); ++start) {
            if (g.degree(static_cast<NodeId>(start)) == 0) continue;
            Rng rng(substream_seed(substream_seed(seed, static_cast<std::uint64_t>(round)), start));
            std::vector<NodeId> walk;
            walk.reserve(static_cast<std::size_t>(walk_length));
            walk.push_back(static_cast<NodeId>(start));
            while (walk.size() < static_cast<std::size_t>(walk_length)) {
                const NodeId cur = walk.back();
                const auto nbrs = g.neighbors(cur);
                if (walk.size() == 1 || first_order) {
                    walk.push_back(nbrs[uniform_index(rng, nbrs.size())]);
                    continue;
                }
                const NodeId prev = walk[walk.size() - 2];
                weights.resize(nbrs.size());
                double total = 0.0;
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    weights[k] = transition_weight(g, prev, nbrs[k], p, q);
                    total += weights[k];
                }
                double r = uniform01(rng) * total;
                std::size_t pick = nbrs.size() - 1;
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    r -= weights[k];
                    if (r < 0.0) {
                        pick = k;
                        break;
                    }
                }
                walk.push_back(nbrs[pick]);
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

NoiseTable::NoiseTable(const std::vector<std::size_t>& counts, double power) {
    cumulative_.resize(counts.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        acc += std::pow(static_cast<double>(counts[i]), power);
        cumulative_[i] = acc;
    }
    if (!(acc > 0.0)) throw InputError("noise table needs at least one node with positive weight");
}

NodeId NoiseTable::sample(Rng& rng) const {
    const double r = uniform01(rng) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return static_cast<NodeId>(std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                     cumulative_.size() - 1));
}

double NoiseTable::probability(NodeId v) const {
    const auto i = static_cast<std::size_t>(v);
    const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
    return (cumulative_[i] - lo) / cumulative_.back();
}

namespace {

Matrix random_init(std::size_t n, int dim, Rng& rng) {
    Matrix m(static_cast<Eigen::Index>(n), dim);
    const double half = 0.5 / dim;
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (uniform01(rng) * 2.0 - 1.0) * half;
    return m;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Matrix train_skipgram(const WalkCorpus& corpus, int dim, int window, int negatives, int epochs, double lr,
                      std::uint64_t seed, const EpochCallback& on_epoch) {
    if (dim < 2) throw std::invalid_argument("embedding dimension must be at least 2");
    if (corpus.walks.empty()) throw InputError("skip-gram needs a non-empty walk corpus");
    if (window < 1) throw std::invalid_argument("window must be at least 1");

    Rng rng(substream_seed(seed, "skipgram"));
    Matrix center = random_init(corpus.num_nodes, dim, rng);
    Matrix context = Matrix::Zero(center.rows(), dim);
    const NoiseTable noise(corpus.degrees);

    std::size_t tokens = 0;
    for (const auto& w : corpus.walks) tokens += w.size();
    const double total_steps = static_cast<double>(tokens) * std::max(epochs, 1);
    double done = 0.0;

    Eigen::RowVectorXd grad_center(dim);
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        for (const auto& walk : corpus.walks) {
            const auto len = static_cast<std::ptrdiff_t>(walk.size());
            for (std::ptrdiff_t pos = 0; pos < len; ++pos, done += 1.0) {
                const double alpha = std::max(lr * (1.0 - done / total_steps), lr * 1e-4);
                // word2vec-style reduced window
                const auto reduce = static_cast<std::ptrdiff_t>(uniform_index(rng, static_cast<std::uint64_t>(window)));
                const std::ptrdiff_t span = window - reduce;
                const NodeId word = walk[static_cast<std::size_t>(pos)];
                for (std::ptrdiff_t off = -span; off <= span; ++off) {
                    const std::ptrdiff_t ctx_pos = pos + off;
                    if (off == 0 || ctx_pos < 0 || ctx_pos >= len) continue;
                    const NodeId ctx = walk[static_cast<std::size_t>(ctx_pos)];
                    auto in = center.row(ctx);
                    grad_center.setZero();
                    for (int k = 0; k <= negatives; ++k) {
                        NodeId target = word;
                        double label = 1.0;
                        if (k > 0) {
                            target = noise.sample(rng);
                            if (target == word) continue;
                            label = 0.0;
                        }
                        auto out = context.row(target);
                        const double g = (label - sigmoid(in.dot(out))) * alpha;
                        grad_center.noalias() += g * out;
                        out.noalias() += g * in;
                    }
                    in += grad_center;
                }
            }
        }
        if (on_epoch) on_epoch(epoch, center);
    }
    return center;
}

Matrix node2vec(const Graph& g, const Node2VecConfig& cfg, std::uint64_t seed) {
    if (g.num_edges() == 0) {
        std::cerr << "warning: graph has no edges; node2vec returns its random initialization\n";
        Rng rng(substream_seed(seed, "skipgram"));
        return random_init(g.num_nodes(), cfg.dim, rng);
    }
    const WalkCorpus corpus = generate_walks(g, cfg.p, cfg.q, cfg.walk_length, cfg.walks_per_node, seed);
    return train_skipgram(corpus, cfg.dim, cfg.window, cfg.negatives, cfg.epochs, cfg.lr, seed);
}

}  // namespace gaat::n2v
