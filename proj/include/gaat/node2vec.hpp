#pragma once

#include <functional>
#include <vector>

#include "gaat/graph.hpp"
#include "gaat/matrix.hpp"

namespace gaat::n2v {

using graph::Graph;
using graph::NodeId;

struct WalkCorpus {
    std::vector<std::vector<NodeId>> walks;
    std::size_t num_nodes = 0;
    std::vector<std::size_t> degrees;  // noise distribution source
    int walk_length = 0;
    int walks_per_node = 0;
    double p = 1.0;
    double q = 1.0;
};

struct Node2VecConfig {
    int dim = 256;
    double p = 1.0;
    double q = 1.0;
    int walk_length = 80;
    int walks_per_node = 10;
    int window = 10;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;
};

/// Unnormalized second-order transition weight for stepping prev -> cur -> next.
double transition_weight(const Graph& g, NodeId prev, NodeId next, double p, double q);

/// Biased second-order random walks; one stream per (round, start node) so the
/// corpus does not depend on iteration order. Isolated nodes start no walk.
WalkCorpus generate_walks(const Graph& g, double p, double q, int walk_length, int walks_per_node, std::uint64_t seed);

/// Negative-sampling noise distribution proportional to weight^0.75.
class NoiseTable {
public:
    explicit NoiseTable(const std::vector<std::size_t>& counts, double power = 0.75);
    NodeId sample(Rng& rng) const;
    double probability(NodeId v) const;
    std::size_t size() const { return cumulative_.size(); }

private:
    std::vector<double> cumulative_;
};

/// Called after every skip-gram epoch with the 1-based epoch number and the current embeddings.
using EpochCallback = std::function<void(int, const Matrix&)>;

/// Skip-gram with negative sampling; returns the center embedding matrix (n x dim).
/// Learning rate decays linearly to lr * 1e-4 over the whole run. Throws InputError on an empty corpus.
Matrix train_skipgram(const WalkCorpus& corpus, int dim, int window, int negatives, int epochs, double lr,
                      std::uint64_t seed, const EpochCallback& on_epoch = {});

/// Walks followed by skip-gram. A graph without edges yields the random initialization.
Matrix node2vec(const Graph& g, const Node2VecConfig& cfg, std::uint64_t seed);

}  // namespace gaat::n2v
