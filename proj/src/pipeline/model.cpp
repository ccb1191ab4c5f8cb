#include "gaat/pipeline/model.hpp"

#include <cstdio>
#include <vector>

#include "gaat/ad/ops.hpp"
#include "gaat/diffusion.hpp"
#include "gaat/error.hpp"
#include "gaat/nn/adapter.hpp"
#include "gaat/nn/encoder.hpp"
#include "gaat/nn/gat.hpp"
#include "gaat/nn/init.hpp"
#include "gaat/objective.hpp"

namespace gaat::pipeline {

std::string Ablation::variant() const {
    std::string name;
    auto add = [&](bool on, const char* tag) {
        if (!on) return;
        if (!name.empty()) name += '+';
        name += tag;
    };
    add(non_aug, "NonAug");
    add(non_ft, "NonFT");
    add(non_sa, "NonSA");
    add(non_con, "NonCon");
    if (score_dot) return name.empty() ? "GAATNet_dot" : name + "+dot";
    return name.empty() ? "GAATNet" : name;
}

double LossConfig::resolved_lambda(std::size_t num_edges) const {
    if (lambda) return *lambda;
    return num_edges > 100000 ? 0.7 : 0.5;
}

std::string to_string(Stage s) { return s == Stage::pretrain ? "pretrain" : "finetune"; }

Stage parse_stage(std::string_view s) {
    if (s == "pretrain") return Stage::pretrain;
    if (s == "finetune") return Stage::finetune;
    throw InputError("unknown stage: " + std::string(s));
}

GraphInputs prepare_pretrain_inputs(const Graph& train_view, const Matrix& x_init, const PretrainConfig& cfg) {
    if (static_cast<std::size_t>(x_init.rows()) != train_view.num_nodes()) {
        throw ShapeError("x_init has " + std::to_string(x_init.rows()) + " rows for " +
                         std::to_string(train_view.num_nodes()) + " nodes");
    }
    GraphInputs in;
    in.pattern = ad::attention_pattern(train_view);
    const double alpha = cfg.ablation.non_aug ? 0.0 : cfg.alpha;
    in.features = Tensor::constant(graph::diffuse(x_init, train_view, alpha, cfg.diffusion_steps));
    if (!cfg.ablation.non_ft) {
        const auto table = graph::build_distant_table(train_view, cfg.hops, cfg.distant_per_node,
                                                      substream_seed(cfg.seed, "distant"));
        in.distant_mean = ad::distant_mean_operator(table);
    }
    return in;
}

GraphInputs prepare_finetune_inputs(const Graph& train_view, const Matrix& x_init) {
    if (static_cast<std::size_t>(x_init.rows()) != train_view.num_nodes()) {
        throw ShapeError("x_init has " + std::to_string(x_init.rows()) + " rows for " +
                         std::to_string(train_view.num_nodes()) + " nodes");
    }
    GraphInputs in;
    in.pattern = ad::attention_pattern(train_view);
    in.features = Tensor::constant(x_init);
    return in;
}

namespace {

std::string layer(int l, const char* rest) { return "encoder." + std::to_string(l) + "." + rest; }

nn::GatHead head(const ad::ModelParams& p, const std::string& prefix) {
    return {p.get(prefix + ".weight"), p.get(prefix + ".attn")};
}

nn::EncoderLayerParams encoder_layer(const ad::ModelParams& p, int l) {
    nn::EncoderLayerParams e;
    e.attn.query = p.get(layer(l, "attn.query.weight"));
    e.attn.key = p.get(layer(l, "attn.key.weight"));
    e.attn.value = p.get(layer(l, "attn.value.weight"));
    e.attn.out_weight = p.get(layer(l, "attn.out.weight"));
    e.attn.out_bias = p.get(layer(l, "attn.out.bias"));
    e.ffn_in_weight = p.get(layer(l, "ffn.in.weight"));
    e.ffn_in_bias = p.get(layer(l, "ffn.in.bias"));
    e.ffn_out_weight = p.get(layer(l, "ffn.out.weight"));
    e.ffn_out_bias = p.get(layer(l, "ffn.out.bias"));
    e.norm1_scale = p.get(layer(l, "norm1.scale"));
    e.norm1_shift = p.get(layer(l, "norm1.shift"));
    e.norm2_scale = p.get(layer(l, "norm2.scale"));
    e.norm2_shift = p.get(layer(l, "norm2.shift"));
    return e;
}

}  // namespace

Tensor GaatModel::embed(const GraphInputs& inputs, bool train, Rng& rng) const {
    const Tensor& x = inputs.features;
    if (x.cols() != model.input_dim) {
        throw ShapeError("features have width " + std::to_string(x.cols()) + ", model expects " +
                         std::to_string(model.input_dim));
    }
    if (stage == Stage::pretrain) {
        std::vector<nn::GatHead> heads;
        for (int k = 0; k < model.gat_heads; ++k) heads.push_back(head(params, "gat.head" + std::to_string(k)));
        Tensor z = nn::gat_forward(x, heads, inputs.pattern, nn::HeadMerge::concat, model.dropout, train, rng);
        if (!ablation.non_ft) {
            Tensor b = nn::distant_bias(z, inputs.distant_mean, {params.get("distant.weight"), params.get("distant.bias")});
            std::vector<nn::EncoderLayerParams> layers;
            for (int l = 0; l < model.encoder_layers; ++l) layers.push_back(encoder_layer(params, l));
            z = nn::transformer_encoder(z, b, layers, model.encoder_heads, model.dropout, train, rng);
        }
        return nn::attention_enhance(z, head(params, "enhance"), inputs.pattern);
    }
    const nn::GatHead first = head(params, "gat");
    Tensor z = nn::gat_forward(x, std::span(&first, 1), inputs.pattern, nn::HeadMerge::concat, model.dropout, train, rng);
    if (!ablation.non_sa) {
        z = nn::adapter_forward(z, {params.get("adapter.w1"), params.get("adapter.w2"), params.get("adapter.w3")});
    }
    z = ad::layer_norm(z, params.get("norm.scale"), params.get("norm.shift"));
    return nn::attention_enhance(z, head(params, "enhance"), inputs.pattern);
}

Tensor GaatModel::score(const Tensor& z, std::span<const Edge> pairs) const {
    if (ablation.score_dot) return obj::dot_score(z, pairs);
    return obj::link_score(z, pairs, params.get("score.psi"));
}

namespace {

std::string describe(Stage stage, const ModelConfig& m, const Ablation& a, int adapter_dim) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "stage=%s;input_dim=%d;gat_heads=%d;gat_head_dim=%d;encoder_layers=%d;encoder_heads=%d;"
                  "ffn_dim=%d;out_dim=%d;non_ft=%d;score_dot=%d",
                  to_string(stage).c_str(), m.input_dim, m.gat_heads, m.gat_head_dim, m.encoder_layers,
                  m.encoder_heads, m.ffn_dim, m.out_dim, a.non_ft ? 1 : 0, a.score_dot ? 1 : 0);
    std::string s(buf);
    if (stage == Stage::finetune) s += ";adapter_dim=" + std::to_string(adapter_dim) + ";non_sa=" + (a.non_sa ? "1" : "0");
    return s;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string GaatModel::architecture() const { return describe(stage, model, ablation, adapter_dim); }
std::string GaatModel::fingerprint() const { return hex64(fnv1a64(architecture())); }

std::string pretrain_fingerprint(const ModelConfig& model, const Ablation& ablation) {
    return hex64(fnv1a64(describe(Stage::pretrain, model, ablation, 0)));
}

GaatModel make_pretrain_model(const ModelConfig& m, const Ablation& ablation, std::uint64_t seed) {
    if (m.gat_heads < 1 || m.gat_head_dim < 1 || m.out_dim < 1 || m.input_dim < 1) {
        throw std::invalid_argument("model widths must be positive");
    }
    GaatModel model;
    model.stage = Stage::pretrain;
    model.model = m;
    model.ablation = ablation;
    Rng rng(substream_seed(seed, "init"));
    ad::ModelParams& p = model.params;

    const int d = m.gat_heads * m.gat_head_dim;
    for (int k = 0; k < m.gat_heads; ++k) {
        const std::string prefix = "gat.head" + std::to_string(k);
        p.add(prefix + ".weight", nn::xavier_uniform(m.input_dim, m.gat_head_dim, rng));
        p.add(prefix + ".attn", Matrix::Zero(2 * m.gat_head_dim, 1));
    }
    if (!ablation.non_ft) {
        if (m.encoder_heads < 1 || d % m.encoder_heads != 0) {
            throw std::invalid_argument("encoder width " + std::to_string(d) + " is not divisible by the head count");
        }
        p.add("distant.weight", nn::xavier_uniform(d, 1, rng));
        p.add("distant.bias", Matrix::Zero(1, 1), false);
        for (int l = 0; l < m.encoder_layers; ++l) {
            for (const char* w : {"attn.query.weight", "attn.key.weight", "attn.value.weight", "attn.out.weight"}) {
                p.add(layer(l, w), nn::xavier_uniform(d, d, rng));
            }
            p.add(layer(l, "attn.out.bias"), Matrix::Zero(1, d), false);
            p.add(layer(l, "ffn.in.weight"), nn::xavier_uniform(d, m.ffn_dim, rng));
            p.add(layer(l, "ffn.in.bias"), Matrix::Zero(1, m.ffn_dim), false);
            p.add(layer(l, "ffn.out.weight"), nn::xavier_uniform(m.ffn_dim, d, rng));
            p.add(layer(l, "ffn.out.bias"), Matrix::Zero(1, d), false);
            for (const char* norm : {"norm1", "norm2"}) {
                p.add(layer(l, norm) + std::string(".scale"), Matrix::Ones(1, d), false);
                p.add(layer(l, norm) + std::string(".shift"), Matrix::Zero(1, d), false);
            }
        }
    }
    p.add("enhance.weight", nn::xavier_uniform(d, m.out_dim, rng));
    p.add("enhance.attn", Matrix::Zero(2 * m.out_dim, 1));
    p.add("score.psi", Matrix::Constant(m.out_dim, 1, m.psi_init));
    if (ablation.score_dot) p.set_trainable({"score.psi"}, false);
    return model;
}

}  // namespace gaat::pipeline
