#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gaat/graph.hpp"

namespace gaat::graph {

enum class SplitName { train, val, test };

std::string to_string(SplitName s);
SplitName parse_split_name(std::string_view s);

struct EdgeSplit {
    std::vector<Edge> train_pos, val_pos, test_pos;
    std::vector<Edge> train_neg, val_neg, test_neg;
    double neg_ratio = 0.0;
    std::uint64_t seed = 0;

    const std::vector<Edge>& positives(SplitName s) const;
    const std::vector<Edge>& negatives(SplitName s) const;
    std::vector<Edge>& positives(SplitName s);
    std::vector<Edge>& negatives(SplitName s);
};

/// Edge split together with the message-passing graph that hides val/test positives.
struct LinkTask {
    Graph full;
    Graph train_view;
    EdgeSplit split;
};

/// Ratio partition of m items by largest remainder (ties go to the earlier part).
std::array<std::size_t, 3> partition_sizes(std::size_t m, std::array<std::size_t, 3> ratios);

/// Shuffles edges deterministically and partitions them into train/val/test positives.
/// Returns the split (negatives empty) and fills `train_view` with val/test edges removed.
/// Throws DegenerateGraphError when m < 10 or any part would be empty.
EdgeSplit split_edges(const Graph& g, std::array<std::size_t, 3> ratios, std::uint64_t seed, Graph* train_view = nullptr);

/// Uniform sample without replacement of `count` unordered non-edges that are
/// neither edges of g nor in `exclude`. Throws SamplingError when infeasible.
std::vector<Edge> sample_negatives(const Graph& g, std::size_t count, std::span<const Edge> exclude, std::uint64_t seed);

/// Positives split 8:1:1 (or `ratios`) plus neg_ratio negatives per positive in every split.
/// Negatives avoid the full edge set and are disjoint across splits.
LinkTask make_link_task(const Graph& g, double neg_ratio, std::uint64_t seed,
                        std::array<std::size_t, 3> ratios = {8, 1, 1});

/// Rebuilds a task from an existing split (e.g. one read from a manifest).
LinkTask make_link_task(const Graph& g, EdgeSplit split);

/// Manifest: header `src dst split label`, one row per edge, ids mapped through `ids`
/// (internal -> written id; identity when empty).
void write_manifest(const std::filesystem::path& path, const EdgeSplit& split, std::span<const std::int64_t> ids = {});
std::string format_manifest(const EdgeSplit& split, std::span<const std::int64_t> ids = {});

/// Reads a manifest; `to_internal` maps written ids back (identity when null).
EdgeSplit read_manifest(const std::filesystem::path& path,
                        const std::unordered_map<std::int64_t, NodeId>* to_internal = nullptr);

}  // namespace gaat::graph
