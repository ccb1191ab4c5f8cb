#include "gaat/pipeline/train.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

#include "gaat/ad/ops.hpp"
#include "gaat/error.hpp"
#include "gaat/nn/init.hpp"
#include "gaat/objective.hpp"

namespace gaat::pipeline {

using graph::SplitName;

std::string to_json(const MetricsRecord& r) {
    nlohmann::ordered_json j;
    j["stage"] = r.stage;
    j["epoch"] = r.epoch;
    j["split"] = r.split;
    j["auc"] = r.auc;
    j["f1"] = r.f1;
    j["ap"] = r.ap;
    j["loss_link"] = r.loss_link;
    j["loss_con"] = r.loss_con;
    j["loss_total"] = r.loss_total;
    j["seconds_per_epoch"] = r.seconds_per_epoch;
    j["trainable_params"] = r.trainable_params;
    return j.dump();
}

void assert_no_leakage(const GraphInputs& inputs, const graph::EdgeSplit& split) {
    std::unordered_set<std::uint64_t> hidden;
    for (SplitName s : {SplitName::val, SplitName::test}) {
        for (const Edge& e : split.positives(s)) hidden.insert(graph::edge_key(e));
    }
    const ad::Csr& p = inputs.pattern;
    for (std::size_t k = 0; k < p.nnz(); ++k) {
        if (p.rows[k] == p.cols[k]) continue;
        if (hidden.contains(graph::edge_key(graph::make_edge(p.rows[k], p.cols[k])))) {
            throw std::logic_error("message-passing graph contains a held-out positive edge");
        }
    }
}

namespace {

struct Batch {
    std::vector<Edge> pairs;
    std::vector<double> labels;
};

Batch make_batch(const graph::EdgeSplit& split, SplitName s) {
    Batch b;
    const auto& pos = split.positives(s);
    const auto& neg = split.negatives(s);
    if (pos.empty() || neg.empty()) throw DegenerateGraphError(to_string(s) + " split needs positives and negatives");
    b.pairs.reserve(pos.size() + neg.size());
    b.pairs.insert(b.pairs.end(), pos.begin(), pos.end());
    b.pairs.insert(b.pairs.end(), neg.begin(), neg.end());
    b.labels.assign(pos.size(), 1.0);
    b.labels.resize(b.pairs.size(), 0.0);
    return b;
}

struct Losses {
    Tensor link, con, total;
    Tensor scores;
};

Losses compute_losses(const GaatModel& model, const Tensor& z, const Batch& batch, std::span<const Edge> positives,
                      const LossConfig& loss, double lambda) {
    Losses l;
    l.scores = model.score(z, batch.pairs);
    l.link = obj::link_loss(l.scores, batch.labels);
    l.con = lambda > 0.0 ? obj::contrastive_loss(z, positives, batch.pairs, loss.tau, loss.denominator)
                         : Tensor::scalar(0.0);
    l.total = obj::total_loss(l.link, l.con, lambda);
    return l;
}

std::vector<double> column(const Tensor& t) {
    return std::vector<double>(t.value().data(), t.value().data() + t.value().size());
}

double effective_lambda(const GaatModel& model, const LossConfig& loss, std::size_t num_edges) {
    return model.ablation.non_con ? 0.0 : loss.resolved_lambda(num_edges);
}

std::vector<Matrix> snapshot(const ad::ModelParams& p) {
    std::vector<Matrix> s;
    s.reserve(p.size());
    for (const auto& e : p.entries()) s.push_back(e.tensor.value());
    return s;
}

void check_finite_param(const ad::ParamEntry& e) { ad::check_finite(e.tensor.value(), e.name.c_str()); }

void restore(ad::ModelParams& p, const std::vector<Matrix>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) p.entries()[i].tensor.mutable_value() = s[i];
}

}  // namespace

MetricsRecord evaluate(const GaatModel& model, const GraphInputs& inputs, const graph::EdgeSplit& split,
                       SplitName which, const LossConfig& loss, std::size_t num_edges) {
    assert_no_leakage(inputs, split);
    const Batch batch = make_batch(split, which);
    Rng unused(0);
    const Tensor z = model.embed(inputs, false, unused);
    const Losses l = compute_losses(model, z, batch, split.positives(which), loss, effective_lambda(model, loss, num_edges));
    const std::vector<double> scores = column(l.scores);
    const obj::Metrics m = obj::evaluate_scores(scores, batch.labels);
    MetricsRecord r;
    r.stage = to_string(model.stage);
    r.split = to_string(which);
    r.auc = m.auc;
    r.f1 = m.f1;
    r.ap = m.ap;
    r.loss_link = l.link.item();
    r.loss_con = l.con.item();
    r.loss_total = l.total.item();
    r.trainable_params = model.params.trainable_scalars();
    return r;
}

TrainResult train(GaatModel& model, const GraphInputs& inputs, const graph::LinkTask& task, const LossConfig& loss,
                  const OptimConfig& optim, std::uint64_t seed, const MetricsSink& sink) {
    if (optim.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (optim.patience < 1) throw std::invalid_argument("patience must be at least 1");
    assert_no_leakage(inputs, task.split);

    const std::size_t num_edges = task.full.num_edges();
    const double lambda = effective_lambda(model, loss, num_edges);
    const Batch batch = make_batch(task.split, SplitName::train);
    const std::size_t trainable = model.params.trainable_scalars();
    const std::string stage = to_string(model.stage);

    TrainResult result;
    // Epoch 0 is the model as handed in; it is also the first early-stopping candidate.
    MetricsRecord initial = evaluate(model, inputs, task.split, SplitName::val, loss, num_edges);
    result.val_history.push_back(initial);
    if (sink) sink(initial);
    result.best_val_auc = initial.auc;
    std::vector<Matrix> best = snapshot(model.params);
    double total_seconds = 0.0;
    for (int epoch = 1; epoch <= optim.epochs; ++epoch) {
        MetricsRecord rec, val;
        try {
            const auto start = std::chrono::steady_clock::now();
            Rng rng(substream_seed(substream_seed(seed, "dropout"), static_cast<std::uint64_t>(epoch)));
            const Tensor z = model.embed(inputs, true, rng);
            const Losses l = compute_losses(model, z, batch, task.split.train_pos, loss, lambda);
            if (!std::isfinite(l.total.item())) throw NumericError("non-finite training loss");
            l.total.backward();
            ad::adam_step(model.params, optim.adam);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            total_seconds += seconds;

            const obj::Metrics m = obj::evaluate_scores(column(l.scores), batch.labels);
            rec = {stage, epoch, "train", m.auc, m.f1, m.ap, l.link.item(), l.con.item(), l.total.item(), seconds, trainable};
            for (const auto& e : model.params.entries()) check_finite_param(e);
            val = evaluate(model, inputs, task.split, SplitName::val, loss, num_edges);
        } catch (const NumericError& e) {
            model.params.zero_grad();
            restore(model.params, best);
            result.numeric_failure = "epoch " + std::to_string(epoch) + ": " + e.what();
            break;
        }
        result.epochs_run = epoch;
        result.train_history.push_back(rec);
        if (sink) sink(rec);

        val.epoch = epoch;
        val.seconds_per_epoch = rec.seconds_per_epoch;
        result.val_history.push_back(val);
        if (sink) sink(val);

        if (val.auc > result.best_val_auc) {
            result.best_val_auc = val.auc;
            result.best_epoch = epoch;
            best = snapshot(model.params);
        } else if (epoch - result.best_epoch >= optim.patience) {
            break;
        }
    }
    if (result.epochs_run > 0) result.mean_seconds_per_epoch = total_seconds / result.epochs_run;
    restore(model.params, best);
    return result;
}

Checkpoint PretrainRun::checkpoint() const {
    Checkpoint c;
    c.model = model;
    c.info.best_val_auc = result.best_val_auc;
    c.info.best_epoch = result.best_epoch;
    c.info.trainable_params = model.params.trainable_scalars();
    c.info.seed = config.seed;
    c.info.alpha = config.alpha;
    c.info.diffusion_steps = config.diffusion_steps;
    c.info.hops = config.hops;
    c.info.distant_per_node = config.distant_per_node;
    return c;
}

PretrainRun pretrain(const graph::LinkTask& task, const Matrix& x_init, const PretrainConfig& cfg,
                     const MetricsSink& sink) {
    if (x_init.cols() != cfg.model.input_dim) {
        throw ShapeError("x_init width " + std::to_string(x_init.cols()) + " differs from the model input width " +
                         std::to_string(cfg.model.input_dim));
    }
    PretrainRun run;
    run.config = cfg;
    run.inputs = prepare_pretrain_inputs(task.train_view, x_init, cfg);
    run.model = make_pretrain_model(cfg.model, cfg.ablation, cfg.seed);
    run.result = train(run.model, run.inputs, task, cfg.loss, cfg.optim, cfg.seed, sink);
    return run;
}

GaatModel build_finetune_model(const Checkpoint& ckpt, int target_dim, const FinetuneConfig& cfg) {
    const GaatModel& src = ckpt.model;
    if (src.stage != Stage::pretrain) throw InputError("fine-tuning needs a pretrain checkpoint");
    if (target_dim != src.model.input_dim) {
        throw ShapeError("target embeddings have width " + std::to_string(target_dim) + ", checkpoint expects " +
                         std::to_string(src.model.input_dim));
    }
    const std::string expected = pretrain_fingerprint(src.model, cfg.ablation);
    if (!cfg.allow_fingerprint_mismatch && src.fingerprint() != expected) {
        throw InputError("checkpoint fingerprint " + src.fingerprint() + " does not match the fine-tune configuration (" +
                         expected + ")");
    }
    const ModelConfig& m = src.model;
    const int width = m.gat_heads * m.gat_head_dim;
    if (!cfg.ablation.non_sa && (cfg.adapter_dim < 1 || cfg.adapter_dim >= width)) {
        throw std::invalid_argument("adapter width must lie in [1, " + std::to_string(width) + ")");
    }

    GaatModel out;
    out.stage = Stage::finetune;
    out.model = m;
    out.ablation = cfg.ablation;
    out.adapter_dim = cfg.ablation.non_sa ? 0 : cfg.adapter_dim;
    Rng rng(substream_seed(cfg.seed, "finetune-init"));
    ad::ModelParams& p = out.params;
    const bool random = cfg.random_backbone;

    Matrix first(m.input_dim, width);
    for (int k = 0; k < m.gat_heads; ++k) {
        first.middleCols(k * m.gat_head_dim, m.gat_head_dim) =
            random ? nn::xavier_uniform(m.input_dim, m.gat_head_dim, rng)
                   : src.params.get("gat.head" + std::to_string(k) + ".weight").value();
    }
    p.add("gat.weight", std::move(first));
    p.add("gat.attn", Matrix::Zero(2 * width, 1));
    if (!cfg.ablation.non_sa) {
        p.add("adapter.w1", nn::xavier_uniform(width, cfg.adapter_dim, rng));
        p.add("adapter.w2", nn::xavier_uniform(cfg.adapter_dim, cfg.adapter_dim, rng));
        p.add("adapter.w3", nn::xavier_uniform(cfg.adapter_dim, width, rng));
    }
    const std::string last_norm = "encoder." + std::to_string(m.encoder_layers - 1) + ".norm2";
    if (!random && src.params.contains(last_norm + ".scale")) {
        p.add("norm.scale", src.params.get(last_norm + ".scale").value(), false);
        p.add("norm.shift", src.params.get(last_norm + ".shift").value(), false);
    } else {
        p.add("norm.scale", Matrix::Ones(1, width), false);
        p.add("norm.shift", Matrix::Zero(1, width), false);
    }
    if (random) {
        p.add("enhance.weight", nn::xavier_uniform(width, m.out_dim, rng));
        p.add("enhance.attn", Matrix::Zero(2 * m.out_dim, 1));
        p.add("score.psi", Matrix::Constant(m.out_dim, 1, m.psi_init));
    } else {
        p.add("enhance.weight", src.params.get("enhance.weight").value());
        p.add("enhance.attn", src.params.get("enhance.attn").value());
        p.add("score.psi", src.params.get("score.psi").value());
    }

    p.freeze_all();
    p.set_trainable([&](const std::string& name) {
        if (name == "score.psi") return !cfg.ablation.score_dot;
        return name == "gat.attn" || name.starts_with("adapter.") || name.starts_with("norm.");
    }, true);
    return out;
}

Checkpoint FinetuneRun::checkpoint() const {
    Checkpoint c;
    c.model = model;
    c.info.best_val_auc = result.best_val_auc;
    c.info.best_epoch = result.best_epoch;
    c.info.trainable_params = model.params.trainable_scalars();
    c.info.pretrain_trainable_params = pretrain_trainable_params;
    c.info.pretrain_fingerprint = pretrain_fingerprint;
    c.info.seed = config.seed;
    return c;
}

FinetuneRun finetune(const graph::LinkTask& task, const Matrix& x_init, const Checkpoint& ckpt,
                     const FinetuneConfig& cfg, const MetricsSink& sink) {
    FinetuneRun run;
    run.config = cfg;
    run.model = build_finetune_model(ckpt, static_cast<int>(x_init.cols()), cfg);
    run.pretrain_trainable_params = ckpt.info.trainable_params;
    run.pretrain_fingerprint = ckpt.model.fingerprint();
    run.inputs = prepare_finetune_inputs(task.train_view, x_init);
    run.result = train(run.model, run.inputs, task, cfg.loss, cfg.optim, cfg.seed, sink);
    return run;
}

}  // namespace gaat::pipeline
