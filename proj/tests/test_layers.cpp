#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gaat/ad/params.hpp"
#include "gradient_cases.hpp"

using namespace gaat;
using namespace gaat::nn;
using ad::Tensor;
using test::random_matrix;

namespace {

Tensor c(const Matrix& m) { return Tensor::constant(m); }

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

double elu_ref(double x) { return x > 0 ? x : std::expm1(x); }

double gelu_ref(double x) {
    return 0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
}

/// Dense reference for one GAT head over N(i) plus self.
Matrix gat_head_ref(const graph::Graph& g, const Matrix& x, const Matrix& w, const Matrix& a) {
    const Matrix h = x * w;
    const Eigen::Index dh = w.cols();
    Matrix out(x.rows(), dh);
    for (graph::NodeId i = 0; i < graph::NodeId(g.num_nodes()); ++i) {
        std::vector<graph::NodeId> nb(g.neighbors(i).begin(), g.neighbors(i).end());
        nb.push_back(i);
        std::vector<double> e;
        for (auto j : nb) {
            const double s = h.row(i).dot(a.col(0).head(dh)) + h.row(j).dot(a.col(0).tail(dh));
            e.push_back(s > 0 ? s : 0.2 * s);
        }
        const double mx = *std::max_element(e.begin(), e.end());
        double z = 0.0;
        for (double& v : e) z += (v = std::exp(v - mx));
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dh);
        for (std::size_t k = 0; k < nb.size(); ++k) acc += (e[k] / z) * h.row(nb[k]);
        for (Eigen::Index c2 = 0; c2 < dh; ++c2) out(i, c2) = elu_ref(acc(c2));
    }
    return out;
}

/// Dense reference for multi-head key-biased attention with output projection.
Matrix attention_ref(const Matrix& z, const Matrix& b, const Matrix& wq, const Matrix& wk, const Matrix& wv,
                     const Matrix& wo, const Matrix& bo, int heads) {
    const Eigen::Index dk = z.cols() / heads;
    const Matrix q = z * wq, k = z * wk, v = z * wv;
    Matrix concat(z.rows(), z.cols());
    for (int h = 0; h < heads; ++h) {
        Matrix s = q.middleCols(h * dk, dk) * k.middleCols(h * dk, dk).transpose() / std::sqrt(double(dk));
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            s.row(i) += b.col(0).transpose();
            s.row(i) = (s.row(i).array() - s.row(i).maxCoeff()).exp();
            s.row(i) /= s.row(i).sum();
        }
        concat.middleCols(h * dk, dk) = s * v.middleCols(h * dk, dk);
    }
    return (concat * wo).rowwise() + bo.row(0);
}

AttentionParams attention_params(const Matrix& wq, const Matrix& wk, const Matrix& wv, const Matrix& wo,
                                 const Matrix& bo) {
    return {c(wq), c(wk), c(wv), c(wo), c(bo)};
}

}  // namespace

TEST_CASE("gat hand evaluation on a two-node path") {
    const auto g = test::path_graph(2);
    const ad::Csr pattern = ad::attention_pattern(g);
    Matrix x(2, 1);
    x << 1.0, 0.0;
    Matrix a(2, 1);
    a << 1.0, 1.0;
    const GatHead head{c(scalar(2.0)), c(a)};
    Rng rng(0);
    const Matrix z = gat_forward(c(x), std::vector{head}, pattern, HeadMerge::concat, 0.0, false, rng).value();
    const double alpha00 = std::exp(4.0) / (std::exp(4.0) + std::exp(2.0));
    CHECK(alpha00 == doctest::Approx(0.8808).epsilon(1e-4));
    CHECK(z(0, 0) == doctest::Approx(elu_ref(alpha00 * 2.0)).epsilon(1e-12));
    CHECK(std::abs(z(0, 0) - 1.7616) < 1e-4);

    const Matrix alpha = gat_attention(c(x), head, pattern).value();
    CHECK(alpha(0, 0) == doctest::Approx(alpha00).epsilon(1e-12));
}

TEST_CASE("gat with identity weight and zero attention averages neighbors and self") {
    const auto g = graph::erdos_renyi(8, 0.3, 2);
    Rng rng(2);
    const Matrix x = random_matrix(8, 3, rng);
    const GatHead head{c(Matrix::Identity(3, 3)), c(Matrix::Zero(6, 1))};
    const ad::Csr pattern = ad::attention_pattern(g);
    const Matrix z = gat_forward(c(x), std::vector{head}, pattern, HeadMerge::concat, 0.0, false, rng).value();
    for (graph::NodeId i = 0; i < 8; ++i) {
        Eigen::RowVectorXd mean = x.row(i);
        for (auto j : g.neighbors(i)) mean += x.row(j);
        mean /= double(g.degree(i) + 1);
        for (Eigen::Index k = 0; k < 3; ++k) CHECK(z(i, k) == doctest::Approx(elu_ref(mean(k))).epsilon(1e-12));
    }
}

TEST_CASE("gat isolated node sees only itself") {
    const auto g = test::from_pairs(3, {{0, 1}});
    Rng rng(1);
    const Matrix x = random_matrix(3, 2, rng);
    const Matrix w = random_matrix(2, 2, rng);
    const GatHead head{c(w), c(random_matrix(4, 1, rng))};
    const Matrix z = gat_forward(c(x), std::vector{head}, ad::attention_pattern(g), HeadMerge::concat, 0.0, false, rng).value();
    const Eigen::RowVectorXd h = x.row(2) * w;
    for (Eigen::Index k = 0; k < 2; ++k) CHECK(z(2, k) == doctest::Approx(elu_ref(h(k))).epsilon(1e-14));
}

TEST_CASE("gat matches a dense reference and merges heads") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const auto g = graph::erdos_renyi(9, 0.3, seed);
        const Matrix x = random_matrix(9, 4, rng);
        std::vector<GatHead> heads;
        std::vector<Matrix> refs;
        for (int k = 0; k < 3; ++k) {
            const Matrix w = random_matrix(4, 2, rng), a = random_matrix(4, 1, rng);
            heads.push_back({c(w), c(a)});
            refs.push_back(gat_head_ref(g, x, w, a));
        }
        const ad::Csr pattern = ad::attention_pattern(g);
        const Matrix cat = gat_forward(c(x), heads, pattern, HeadMerge::concat, 0.0, false, rng).value();
        const Matrix avg = gat_forward(c(x), heads, pattern, HeadMerge::average, 0.0, false, rng).value();
        CHECK(cat.cols() == 6);
        Matrix mean = Matrix::Zero(9, 2);
        for (int k = 0; k < 3; ++k) {
            CHECK((cat.middleCols(2 * k, 2) - refs[std::size_t(k)]).cwiseAbs().maxCoeff() < 1e-12);
            mean += refs[std::size_t(k)] / 3.0;
        }
        CHECK((avg - mean).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("gat attention rows are distributions") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const auto g = graph::erdos_renyi(15, 0.2, seed);
        const ad::Csr pattern = ad::attention_pattern(g);
        const GatHead head{c(random_matrix(5, 3, rng)), c(random_matrix(6, 1, rng, -3, 3))};
        const Matrix alpha = gat_attention(c(random_matrix(15, 5, rng)), head, pattern).value();
        for (std::int32_t i = 0; i < pattern.num_rows; ++i) {
            double s = 0.0;
            for (auto k = pattern.offsets[std::size_t(i)]; k < pattern.offsets[std::size_t(i) + 1]; ++k) {
                CHECK(alpha(k, 0) >= 0.0);
                s += alpha(k, 0);
            }
            CHECK(std::abs(s - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("gat is permutation equivariant") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const std::size_t n = 4 + seed % 7;
        const auto g = graph::erdos_renyi(n, 0.4, seed);
        std::vector<graph::NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<graph::Edge> moved;
        for (const auto& e : g.edges()) moved.push_back(graph::make_edge(perm[std::size_t(e.u)], perm[std::size_t(e.v)]));
        const graph::Graph h(n, moved);

        const Matrix x = random_matrix(Eigen::Index(n), 3, rng);
        Matrix px(x.rows(), x.cols());
        for (std::size_t i = 0; i < n; ++i) px.row(perm[i]) = x.row(Eigen::Index(i));
        const std::vector<GatHead> heads{{c(random_matrix(3, 2, rng)), c(random_matrix(4, 1, rng))},
                                         {c(random_matrix(3, 2, rng)), c(random_matrix(4, 1, rng))}};
        const Matrix z = gat_forward(c(x), heads, ad::attention_pattern(g), HeadMerge::concat, 0.0, false, rng).value();
        const Matrix pz = gat_forward(c(px), heads, ad::attention_pattern(h), HeadMerge::concat, 0.0, false, rng).value();
        for (std::size_t i = 0; i < n; ++i)
            CHECK((pz.row(perm[i]) - z.row(Eigen::Index(i))).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("gat dropout only applies in training mode") {
    const auto g = graph::erdos_renyi(10, 0.3, 1);
    Rng rng(1);
    const Matrix x = random_matrix(10, 3, rng);
    const std::vector<GatHead> heads{{c(random_matrix(3, 4, rng)), c(random_matrix(8, 1, rng))}};
    const ad::Csr pattern = ad::attention_pattern(g);
    Rng r1(5), r2(5);
    const Matrix eval = gat_forward(c(x), heads, pattern, HeadMerge::concat, 0.3, false, r1).value();
    const Matrix eval0 = gat_forward(c(x), heads, pattern, HeadMerge::concat, 0.0, true, r2).value();
    CHECK(test::bitwise_equal(eval, eval0));
    const Matrix train = gat_forward(c(x), heads, pattern, HeadMerge::concat, 0.3, true, r1).value();
    CHECK((train.array() == 0.0).count() > 0);
}

TEST_CASE("distant bias examples") {
    // node 0 is 2 hops from both 2 and 3 in the graph 0-1, 1-2, 1-3; node 1 has no distant neighbor
    const auto g = test::from_pairs(4, {{0, 1}, {1, 2}, {1, 3}});
    const auto table = graph::build_distant_table(g, {2}, 2, 1);
    REQUIRE(table.samples[0].size() == 2);
    REQUIRE(table.samples[1].empty());
    const ad::WeightedCsr op = ad::distant_mean_operator(table);
    Matrix z(4, 2);
    z << 9, 9, 9, 9, 1, 0, 0, 1;
    Matrix w(2, 1);
    w << 3, 5;
    const Matrix b = distant_bias(c(z), op, {c(w), c(scalar(0.0))}).value();
    CHECK(b.rows() == 4);
    CHECK(b(0, 0) == doctest::Approx(4.0).epsilon(1e-15));

    const Matrix b1 = distant_bias(c(z), op, {c(w), c(scalar(-0.7))}).value();
    CHECK(b1(1, 0) == -0.7);

    const Matrix b2 = distant_bias(c(z), op, {c(Matrix::Zero(2, 1)), c(scalar(1.25))}).value();
    CHECK((b2.array() == 1.25).all());
}

TEST_CASE("biased attention hand example mixes rows three to one") {
    Matrix z(2, 1);
    z << 1.0, -3.0;
    Matrix b(2, 1);
    b << std::log(3.0), 0.0;
    const auto params = attention_params(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                         Matrix::Zero(1, 1));
    const Matrix p = attention_head_probs(c(z), c(b), params, 1, 0).value();
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(p(i, 0) - 0.75) < 1e-12);
        CHECK(std::abs(p(i, 1) - 0.25) < 1e-12);
    }
    const Matrix out = biased_attention(c(z), c(b), params, 1).value();
    for (int i = 0; i < 2; ++i) CHECK(std::abs(out(i, 0) - (0.75 * 1.0 + 0.25 * -3.0)) < 1e-12);
}

TEST_CASE("biased attention matches a dense reference") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const int heads = 1 + int(seed % 3);
        const Eigen::Index n = 2 + Eigen::Index(seed % 6), d = heads * 2;
        const Matrix z = random_matrix(n, d, rng), b = random_matrix(n, 1, rng, -2, 2);
        const Matrix wq = random_matrix(d, d, rng), wk = random_matrix(d, d, rng), wv = random_matrix(d, d, rng),
                     wo = random_matrix(d, d, rng), bo = random_matrix(1, d, rng);
        const auto params = attention_params(wq, wk, wv, wo, bo);
        const Matrix out = biased_attention(c(z), c(b), params, heads).value();
        CHECK((out - attention_ref(z, b, wq, wk, wv, wo, bo, heads)).cwiseAbs().maxCoeff() < 1e-12);
        const Matrix zero_bias = biased_attention(c(z), c(Matrix::Zero(n, 1)), params, heads).value();
        CHECK((zero_bias - attention_ref(z, Matrix::Zero(n, 1), wq, wk, wv, wo, bo, heads)).cwiseAbs().maxCoeff() < 1e-12);
        for (int h = 0; h < heads; ++h) {
            const Matrix p = attention_head_probs(c(z), c(b), params, heads, h).value();
            for (Eigen::Index i = 0; i < n; ++i) {
                CHECK(std::abs(p.row(i).sum() - 1.0) <= 1e-9);
                CHECK(p.row(i).minCoeff() >= 0.0);
            }
        }
    }
}

TEST_CASE("biased attention with a single node returns its value row") {
    Rng rng(3);
    const Matrix z = random_matrix(1, 4, rng);
    const Matrix wv = random_matrix(4, 4, rng);
    const auto params = attention_params(random_matrix(4, 4, rng), random_matrix(4, 4, rng), wv, Matrix::Identity(4, 4),
                                         Matrix::Zero(1, 4));
    for (double bias : {-5.0, 0.0, 3.0}) {
        const Matrix out = biased_attention(c(z), c(scalar(bias)), params, 2).value();
        CHECK((out - z * wv).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("encoder with zero maps reduces to repeated layer norm") {
    Rng rng(4);
    const Matrix z = random_matrix(5, 4, rng);
    const Tensor ones = c(Matrix::Ones(1, 4)), zeros = c(Matrix::Zero(1, 4));
    const Matrix zero4 = Matrix::Zero(4, 4);
    EncoderLayerParams layer{attention_params(zero4, zero4, zero4, zero4, Matrix::Zero(1, 4)),
                             c(Matrix::Zero(4, 3)), c(Matrix::Zero(1, 3)), c(Matrix::Zero(3, 4)), zeros,
                             ones, zeros, ones, zeros};
    const Matrix b = random_matrix(5, 1, rng);
    const Matrix out = transformer_encoder(c(z), c(b), std::vector{layer}, 2, 0.0, false, rng).value();
    const Matrix expected = ad::layer_norm(ad::layer_norm(c(z), ones, zeros), ones, zeros).value();
    CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-14);

    const std::vector<EncoderLayerParams> two{layer, layer};
    const Matrix out2 = transformer_encoder(c(z), c(b), two, 2, 0.3, true, rng).value();
    CHECK(out2.rows() == 5);
    CHECK(out2.cols() == 4);
}

TEST_CASE("adapter hand chain") {
    Matrix z(1, 2), w1(2, 1), w2(1, 1), w3(1, 2);
    z << 1, 1;
    w1 << 1, 1;
    w2 << 1;
    w3 << 1, 0;
    const Matrix out = adapter_forward(c(z), {c(w1), c(w2), c(w3)}).value();
    const double inner = gelu_ref(2.0), mid = gelu_ref(inner);
    CHECK(std::abs(inner - 1.9546) < 1e-4);
    CHECK(std::abs(mid - 1.9051752657785717) < 1e-6);
    CHECK(std::abs(out(0, 0) - 2.9051752657785717) < 1e-6);
    CHECK(out(0, 1) == 1.0);
}

TEST_CASE("adapter identities") {
    Rng rng(6);
    const Matrix z = random_matrix(6, 5, rng);
    const Matrix zero_all = adapter_forward(c(z), {c(Matrix::Zero(5, 2)), c(Matrix::Zero(2, 2)), c(Matrix::Zero(2, 5))}).value();
    CHECK(test::bitwise_equal(zero_all, z));
    const Matrix zero_out =
        adapter_forward(c(z), {c(random_matrix(5, 2, rng)), c(random_matrix(2, 2, rng)), c(Matrix::Zero(2, 5))}).value();
    CHECK(test::bitwise_equal(zero_out, z));
}

TEST_CASE("adapter parameter count at 256 wide with bottleneck 8") {
    const std::size_t count = 256 * 8 + 8 * 8 + 8 * 256;
    CHECK(count == 4160);
    ad::ModelParams p;
    Rng rng(1);
    p.add("w1", random_matrix(256, 8, rng));
    p.add("w2", random_matrix(8, 8, rng));
    p.add("w3", random_matrix(8, 256, rng));
    CHECK(p.trainable_scalars() == 4160);
}

TEST_CASE("attention enhance output width") {
    const auto g = graph::erdos_renyi(12, 0.3, 3);
    Rng rng(3);
    const Matrix z = attention_enhance(c(random_matrix(12, 16, rng)), {c(random_matrix(16, 8, rng)), c(random_matrix(16, 1, rng))},
                                       ad::attention_pattern(g))
                         .value();
    CHECK(z.rows() == 12);
    CHECK(z.cols() == 8);
}

TEST_CASE("source attention gradient vanishes when no row crosses the kink") {
    const graph::Graph g = test::path_graph(3);
    const auto pattern = ad::attention_pattern(g);
    Matrix x(3, 1), w(1, 1), a(2, 1);
    x << 1, 2, 3;
    w << 1;
    a << 0.5, 0.25;  // every logit is positive
    REQUIRE_FALSE(test::detail::logits_straddle(pattern, x, w, a));
    auto in = test::leaves({x, w, a});
    auto loss = test::readout(gat_attention(in[0], {in[1], in[2]}, pattern));
    loss.backward();
    CHECK(std::abs(in[2].grad()(0, 0)) < 1e-12);
    CHECK(std::abs(in[2].grad()(1, 0)) > 1e-6);
}

TEST_CASE("every layer matches finite differences") {
    for (const auto& gc : test::layer_cases()) {
        INFO(gc.name);
        CHECK(test::worst_error(gc, 50) <= 1e-4);
    }
}
