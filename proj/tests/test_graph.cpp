#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/LU>

#include "doctest.h"
#include "gaat/diffusion.hpp"
#include "gaat/distant.hpp"
#include "gaat/error.hpp"
#include "gaat/graph.hpp"
#include "gaat/split.hpp"
#include "support.hpp"

using namespace gaat;
using namespace gaat::graph;
using gaat::test::from_pairs;

TEST_CASE("edge list parsing reindexes and drops self-loops") {
    const LoadedGraph a = parse_edge_list("0 1\n1 2\n");
    CHECK(a.graph.num_nodes() == 3);
    CHECK(a.graph.num_edges() == 2);
    CHECK(a.graph.degrees() == std::vector<std::size_t>{1, 2, 1});

    const LoadedGraph b = parse_edge_list("5 5\n5 7\n");
    CHECK(b.graph.num_nodes() == 2);
    CHECK(b.graph.num_edges() == 1);
    CHECK(b.dropped_self_loops == 1);
    CHECK(b.original_ids == std::vector<std::int64_t>{5, 7});
    CHECK(b.internal_ids.at(7) == 1);
}

TEST_CASE("edge list parsing handles comments and duplicates") {
    const LoadedGraph g = parse_edge_list("# header\n1 2\n2 1 # again\n\n1 3\n");
    CHECK(g.graph.num_edges() == 2);
    CHECK(g.dropped_duplicates == 1);
}

TEST_CASE("edge list errors") {
    CHECK_THROWS_AS(parse_edge_list("0 x\n"), InputError);
    CHECK_THROWS_AS(parse_edge_list("0 1 2\n"), InputError);
    CHECK_THROWS_AS(parse_edge_list("# nothing\n"), DegenerateGraphError);
    CHECK_THROWS_AS(parse_edge_list("3 3\n"), DegenerateGraphError);
    CHECK_THROWS_AS(load_edge_list("/nonexistent/edges.txt"), InputError);
}

TEST_CASE("graph invariants hold on random graphs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Graph g = erdos_renyi(30, 0.2, seed);
        std::size_t degree_total = 0;
        for (NodeId v = 0; v < NodeId(g.num_nodes()); ++v) {
            const auto nb = g.neighbors(v);
            CHECK(std::is_sorted(nb.begin(), nb.end()));
            CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
            for (NodeId u : nb) {
                CHECK(u != v);
                CHECK(g.has_edge(u, v));
            }
            degree_total += g.degree(v);
        }
        CHECK(degree_total == 2 * g.num_edges());
    }
}

TEST_CASE("split sizes follow the ratio") {
    const Graph g = erdos_renyi(60, 0.2, 3);
    std::vector<Edge> first(g.edges().begin(), g.edges().begin() + 100);
    const Graph h(60, first);
    REQUIRE(h.num_edges() == 100);
    const EdgeSplit s = split_edges(h, {8, 1, 1}, 7);
    CHECK(s.train_pos.size() == 80);
    CHECK(s.val_pos.size() == 10);
    CHECK(s.test_pos.size() == 10);
}

TEST_CASE("partition of 5429 edges into 8:1:1") {
    CHECK(partition_sizes(5429, {8, 1, 1}) == std::array<std::size_t, 3>{4343, 543, 543});
    CHECK(partition_sizes(100, {8, 1, 1}) == std::array<std::size_t, 3>{80, 10, 10});
    // Independent oracle: floor of each exact quota, then leftover units by descending remainder.
    for (std::size_t m = 10; m < 400; ++m) {
        const auto sizes = partition_sizes(m, {8, 1, 1});
        CHECK(sizes[0] + sizes[1] + sizes[2] == m);
        for (int k = 0; k < 3; ++k) {
            const double quota = double(m) * (k == 0 ? 0.8 : 0.1);
            CHECK(std::abs(double(sizes[std::size_t(k)]) - quota) < 1.0);
        }
    }
}

TEST_CASE("split is deterministic and partitions the edge set") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const Graph g = erdos_renyi(40, 0.15, seed);
        Graph view;
        const EdgeSplit a = split_edges(g, {8, 1, 1}, seed, &view);
        const EdgeSplit b = split_edges(g, {8, 1, 1}, seed);
        CHECK(a.train_pos == b.train_pos);
        CHECK(a.val_pos == b.val_pos);
        CHECK(a.test_pos == b.test_pos);

        std::set<Edge> all;
        for (const auto* part : {&a.train_pos, &a.val_pos, &a.test_pos}) all.insert(part->begin(), part->end());
        CHECK(all.size() == a.train_pos.size() + a.val_pos.size() + a.test_pos.size());
        CHECK(all == test::as_set(g.edges()));

        CHECK(view.num_nodes() == g.num_nodes());
        CHECK(test::as_set(view.edges()) == test::as_set(a.train_pos));
    }
}

TEST_CASE("split rejects tiny graphs") {
    CHECK_THROWS_AS(split_edges(test::path_graph(10), {8, 1, 1}, 1), DegenerateGraphError);
}

TEST_CASE("negative sampling examples") {
    CHECK_THROWS_AS(sample_negatives(test::complete_graph(4), 1, {}, 1), SamplingError);

    const auto path = sample_negatives(test::path_graph(3), 1, {}, 5);
    REQUIRE(path.size() == 1);
    CHECK(path[0] == Edge{0, 2});

    const Graph empty(6, std::vector<Edge>{});
    const auto all = sample_negatives(empty, 15, {}, 9);
    CHECK(test::as_set(all).size() == 15);
    CHECK_THROWS_AS(sample_negatives(empty, 16, {}, 9), SamplingError);
}

TEST_CASE("negative sampling respects edges and exclusions") {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        Rng rng(seed);
        const std::size_t n = 5 + uniform_index(rng, 46);
        const Graph g = erdos_renyi(n, 0.1 + 0.3 * uniform01(rng), seed);
        const std::size_t pairs = n * (n - 1) / 2;
        const std::size_t free_pairs = pairs - g.num_edges();
        if (free_pairs < 2) continue;
        const auto exclude = sample_negatives(g, free_pairs / 4, {}, seed ^ 0xabcdef);
        const std::size_t count = std::min<std::size_t>(20, free_pairs - exclude.size());
        const auto neg = sample_negatives(g, count, exclude, seed);
        const std::set<Edge> excluded = test::as_set(exclude);
        CHECK(test::as_set(neg).size() == neg.size());
        for (const Edge& e : neg) {
            CHECK(e.u < e.v);
            CHECK_FALSE(g.has_edge(e.u, e.v));
            CHECK_FALSE(excluded.contains(e));
        }
        CHECK(neg == sample_negatives(g, count, exclude, seed));
    }
}

TEST_CASE("link task negatives avoid the full edge set and are disjoint across splits") {
    for (double ratio : {1.0, 10.0}) {
        const Graph g = stochastic_block_model(150, 2, 0.1, 0.01, 4);
        const LinkTask t = make_link_task(g, ratio, 3);
        std::set<Edge> seen;
        for (SplitName s : {SplitName::train, SplitName::val, SplitName::test}) {
            const auto& neg = t.split.negatives(s);
            CHECK(neg.size() == std::size_t(ratio) * t.split.positives(s).size());
            for (const Edge& e : neg) {
                CHECK_FALSE(g.has_edge(e.u, e.v));
                CHECK(seen.insert(e).second);
            }
        }
    }
}

TEST_CASE("manifest round trip") {
    const Graph g = erdos_renyi(40, 0.2, 8);
    const LinkTask t = make_link_task(g, 1.0, 2);
    const auto dir = test::scratch_dir("manifest");
    std::vector<std::int64_t> ids(g.num_nodes());
    std::iota(ids.begin(), ids.end(), 100);
    std::unordered_map<std::int64_t, NodeId> back;
    for (std::size_t i = 0; i < ids.size(); ++i) back.emplace(ids[i], NodeId(i));
    write_manifest(dir / "split.tsv", t.split, ids);
    const EdgeSplit r = read_manifest(dir / "split.tsv", &back);
    CHECK(r.train_pos == t.split.train_pos);
    CHECK(r.val_neg == t.split.val_neg);
    CHECK(r.test_pos == t.split.test_pos);
    CHECK(format_manifest(r, ids) == format_manifest(t.split, ids));
    CHECK(format_manifest(t.split, ids).starts_with("src dst split label\n"));
}

TEST_CASE("exact k-hop examples") {
    CHECK(exact_khop(test::path_graph(4), 0, 2) == std::vector<NodeId>{2});
    const Graph star = from_pairs(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(exact_khop(star, 0, 2).empty());
    CHECK(exact_khop(test::cycle_graph(4), 0, 2) == std::vector<NodeId>{2});
}

TEST_CASE("exact k-hop matches an independent BFS") {
    // Oracle: distance by repeated relaxation over the edge list.
    auto distances = [](const Graph& g, NodeId s) {
        std::vector<int> d(g.num_nodes(), -1);
        d[std::size_t(s)] = 0;
        for (bool changed = true; changed;) {
            changed = false;
            for (const Edge& e : g.edges()) {
                for (auto [a, b] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
                    const int da = d[std::size_t(a)];
                    int& db = d[std::size_t(b)];
                    if (da >= 0 && (db < 0 || db > da + 1)) {
                        db = da + 1;
                        changed = true;
                    }
                }
            }
        }
        return d;
    };
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const Graph g = erdos_renyi(10 + seed * 2, 0.08, seed);
        for (NodeId v = 0; v < NodeId(g.num_nodes()); ++v) {
            const auto d = distances(g, v);
            CHECK(bfs_distances(g, v) == d);
            for (int k = 1; k <= 4; ++k) {
                std::vector<NodeId> expected;
                for (std::size_t u = 0; u < d.size(); ++u)
                    if (d[u] == k) expected.push_back(NodeId(u));
                CHECK(exact_khop(g, v, k) == expected);
            }
        }
    }
}

TEST_CASE("distant table examples") {
    const DistantSampleTable path = build_distant_table(test::path_graph(3), {2}, 1, 1);
    CHECK(path.samples[0] == std::vector<NodeId>{2});
    CHECK(path.samples[1].empty());
    CHECK(path.samples[2] == std::vector<NodeId>{0});

    const Graph with_isolated = from_pairs(4, {{0, 1}, {1, 2}});
    CHECK(build_distant_table(with_isolated, {2, 3}, 4, 1).samples[3].empty());

    const Graph c5 = test::cycle_graph(5);
    const DistantSampleTable t = build_distant_table(c5, {2, 3}, 4, 3);
    for (NodeId v = 0; v < 5; ++v) {
        const auto& s = t.samples[std::size_t(v)];
        // In a 5-cycle the exact 2-hop frontier has two nodes and no node sits at distance 3.
        CHECK(s.size() == 2);
        for (NodeId u : s) CHECK(bfs_distances(c5, v)[std::size_t(u)] == 2);
    }
}

TEST_CASE("distant samples sit at an exact hop distance and are deterministic") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Graph g = erdos_renyi(40, 0.06, seed);
        const DistantSampleTable t = build_distant_table(g, {2, 3}, 4, seed);
        const DistantSampleTable again = build_distant_table(g, {2, 3}, 4, seed);
        CHECK(t.samples == again.samples);
        for (NodeId v = 0; v < NodeId(g.num_nodes()); ++v) {
            const auto d = bfs_distances(g, v);
            const auto& s = t.samples[std::size_t(v)];
            const std::size_t frontier = exact_khop(g, v, 2).size() + exact_khop(g, v, 3).size();
            CHECK(s.size() == std::min<std::size_t>(4, frontier));
            CHECK(std::set<NodeId>(s.begin(), s.end()).size() == s.size());
            for (NodeId u : s) CHECK((d[std::size_t(u)] == 2 || d[std::size_t(u)] == 3));
        }
    }
}

TEST_CASE("normalized adjacency examples") {
    const Matrix single = normalized_adjacency(from_pairs(2, {{0, 1}}));
    CHECK(single(0, 1) == 1.0);
    CHECK(single(1, 0) == 1.0);
    CHECK(single(0, 0) == 0.0);

    const Matrix tri = normalized_adjacency(test::complete_graph(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(tri(i, j) == doctest::Approx(i == j ? 0.0 : 0.5).epsilon(1e-15));

    const Matrix iso = normalized_adjacency(from_pairs(3, {{0, 1}}));
    CHECK(iso.row(2).isZero(0.0));
    CHECK(iso.col(2).isZero(0.0));
}

TEST_CASE("normalized adjacency is symmetric with spectral radius at most one") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Graph g = test::random_connected(25, 0.1, seed);
        const Matrix s = normalized_adjacency(g);
        CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
        // Power iteration on S^2 (positive semidefinite) gives the squared spectral radius.
        const Matrix s2 = s * s;
        Rng rng(seed);
        Vector v = test::random_matrix(25, 1, rng, 0.1, 1.0).col(0);
        double lambda = 0.0;
        for (int it = 0; it < 2000; ++it) {
            const Vector w = s2 * v;
            lambda = w.norm() / v.norm();
            v = w.normalized();
        }
        CHECK(std::sqrt(lambda) <= 1.0 + 1e-6);
    }
}

TEST_CASE("diffusion examples") {
    const Graph edge = from_pairs(2, {{0, 1}});
    const Matrix s = normalized_adjacency(edge);
    Matrix x(2, 1);
    x << 1.0, 0.0;
    const Matrix out = diffuse(x, s, 0.5, 2);
    CHECK(out(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(out(1, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(test::bitwise_equal(diffuse(x, s, 0.5, 0), x));
    CHECK(test::bitwise_equal(diffuse(x, s, 0.0, 7), x));
    CHECK_THROWS(diffuse(x, s, 1.0, 2));
    CHECK_THROWS(diffuse(x, s, -0.1, 2));
    CHECK_THROWS_AS(diffuse(Matrix::Zero(3, 1), s, 0.5, 2), ShapeError);
}

TEST_CASE("sparse and dense diffusion agree") {
    Rng rng(5);
    const Graph g = erdos_renyi(40, 0.1, 5);
    const Matrix x = test::random_matrix(40, 6, rng);
    const Matrix dense = diffuse(x, normalized_adjacency(g), 0.15, 50);
    const Matrix sparse = diffuse(x, g, 0.15, 50);
    CHECK((dense - sparse).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("diffusion converges to the linear-system fixed point") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t n = 10 + seed * 2;
        const Graph g = test::random_connected(n, 0.15, seed);
        const Matrix s = normalized_adjacency(g);
        Rng rng(seed);
        const Matrix x = test::random_matrix(Eigen::Index(n), 3, rng);
        for (double alpha : {0.15, 0.5, 0.9}) {
            // X* = (1 - alpha) (I - alpha S)^{-1} X_init
            const Matrix lhs = Matrix::Identity(Eigen::Index(n), Eigen::Index(n)) - alpha * s;
            const Matrix fixed = (1.0 - alpha) * lhs.fullPivLu().solve(x);
            const Matrix iterated = diffuse(x, s, alpha, 2000);
            CHECK((iterated - fixed).cwiseAbs().maxCoeff() < 1e-10);
            const Matrix residual = (1.0 - alpha) * x + alpha * s * iterated - iterated;
            CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);

            // Step sizes stop growing once the iteration is underway.
            std::vector<double> steps;
            Matrix prev = x;
            for (int t = 1; t <= 60; ++t) {
                const Matrix next = diffuse(x, s, alpha, t);
                steps.push_back((next - prev).cwiseAbs().maxCoeff());
                prev = next;
            }
            for (std::size_t t = 20; t + 1 < steps.size(); ++t) CHECK(steps[t + 1] <= steps[t] + 1e-15);
        }
    }
}

TEST_CASE("density") {
    CHECK(density(test::complete_graph(3)) == doctest::Approx(1000.0));
    CHECK(density(from_pairs(2, {{0, 1}})) == doctest::Approx(1000.0));
    // Same formula as the published Cora figure: 2 * 5429 * 1e3 / (2708 * 2707).
    CHECK(2.0 * 5429.0 * 1e3 / (2708.0 * 2707.0) == doctest::Approx(1.481).epsilon(1e-3));
    CHECK_THROWS_AS(density(Graph(1, std::vector<Edge>{})), DegenerateGraphError);
}

TEST_CASE("stochastic block model layout") {
    const auto blocks = sbm_blocks(7, 2);
    CHECK(blocks == std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 1});
    const Graph g = stochastic_block_model(200, 2, 0.2, 0.01, 1);
    std::size_t intra = 0;
    const auto b = sbm_blocks(200, 2);
    for (const Edge& e : g.edges()) intra += b[std::size_t(e.u)] == b[std::size_t(e.v)];
    CHECK(double(intra) / double(g.num_edges()) > 0.9);
    CHECK(g.edges() == stochastic_block_model(200, 2, 0.2, 0.01, 1).edges());
}
