#include "gaat/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "gaat/error.hpp"
#include "gaat/io/config.hpp"
#include "gaat/io/container.hpp"
#include "gaat/node2vec.hpp"
#include "gaat/pipeline/checkpoint.hpp"
#include "gaat/pipeline/seeds.hpp"
#include "gaat/pipeline/train.hpp"
#include "gaat/split.hpp"

namespace gaat::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const SamplingError& e) {
        std::cerr << "sampling error: " << e.what() << "\n";
        return kSampling;
    } catch (const DegenerateGraphError& e) {
        std::cerr << "degenerate graph: " << e.what() << "\n";
        return kDegenerateGraph;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
}

namespace {

std::array<std::size_t, 3> parse_ratio(const std::string& text) {
    std::array<std::size_t, 3> r{};
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> r[0] >> c1 >> r[1] >> c2 >> r[2]) || c1 != ':' || c2 != ':' || !in.eof()) {
        throw UsageError("ratio must look like 8:1:1, got " + text);
    }
    return r;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string graph_identity(const std::string& name, const graph::Graph& g) {
    std::uint64_t h = fnv1a64("");
    for (const auto& e : g.edges()) h = fnv1a64(std::to_string(e.u) + "-" + std::to_string(e.v) + ";", h);
    return name + ":n=" + std::to_string(g.num_nodes()) + ":m=" + std::to_string(g.num_edges()) + ":" + hex64(h);
}

io::ParamContainer embedding_container(const Matrix& x, const std::vector<std::int64_t>& ids) {
    Matrix id_col(static_cast<Eigen::Index>(ids.size()), 1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (std::llabs(ids[i]) > (std::int64_t{1} << 53)) throw InputError("node id too large for the embedding file");
        id_col(static_cast<Eigen::Index>(i), 0) = static_cast<double>(ids[i]);
    }
    io::ParamContainer c;
    c.add_matrix("x_init", x);
    c.add_matrix("node_ids", std::move(id_col));
    return c;
}

struct Embedding {
    Matrix x;
    std::vector<std::int64_t> ids;
};

Embedding load_embedding(const fs::path& path) {
    const auto c = io::ParamContainer::load(path);
    Embedding e;
    e.x = c.matrix("x_init");
    if (c.contains("node_ids")) {
        const Matrix& ids = c.matrix("node_ids");
        if (ids.rows() != e.x.rows()) throw InputError("embedding node_ids do not match x_init rows");
        for (Eigen::Index i = 0; i < ids.rows(); ++i) e.ids.push_back(static_cast<std::int64_t>(ids(i, 0)));
    } else {
        for (Eigen::Index i = 0; i < e.x.rows(); ++i) e.ids.push_back(i);
    }
    return e;
}

std::unordered_map<std::int64_t, graph::NodeId> invert(const std::vector<std::int64_t>& ids) {
    std::unordered_map<std::int64_t, graph::NodeId> m;
    for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], static_cast<graph::NodeId>(i));
    return m;
}

/// Everything a training command needs for one seed.
struct Prepared {
    graph::LoadedGraph loaded;
    graph::LinkTask task;
    Matrix x_init;
    std::string identity;
};

Prepared prepare(const io::RunConfig& cfg, std::uint64_t seed) {
    if (cfg.data.edges.empty()) throw InputError("config needs data.edges");
    Prepared p;
    p.loaded = graph::load_edge_list(cfg.data.edges);
    const graph::Graph& g = p.loaded.graph;
    if (!cfg.data.split.empty()) {
        p.task = graph::make_link_task(g, graph::read_manifest(cfg.data.split, &p.loaded.internal_ids));
    } else {
        p.task = graph::make_link_task(g, cfg.data.neg_ratio, substream_seed(seed, "split"), cfg.data.ratios);
    }
    if (!cfg.data.embedding.empty()) {
        Embedding e = load_embedding(cfg.data.embedding);
        if (e.ids != p.loaded.original_ids) throw InputError("embedding rows do not match the node ids of " + cfg.data.edges);
        p.x_init = std::move(e.x);
    } else {
        std::cerr << "running node2vec on the training view (" << g.num_nodes() << " nodes)\n";
        p.x_init = n2v::node2vec(p.task.train_view, cfg.node2vec, substream_seed(seed, "node2vec"));
    }
    p.identity = graph_identity(cfg.data.name, g);
    return p;
}

void apply_ablations(io::RunConfig& cfg, const std::vector<std::string>& flags) {
    for (const std::string& f : flags) {
        if (f == "non_aug") cfg.ablation.non_aug = true;
        else if (f == "non_ft") cfg.ablation.non_ft = true;
        else if (f == "non_sa") cfg.ablation.non_sa = true;
        else if (f == "non_con") cfg.ablation.non_con = true;
        else if (f == "score_dot") cfg.ablation.score_dot = true;
        else throw UsageError("unknown ablation: " + f);
    }
}

io::RunConfig load_run_config(const TrainArgs& args) {
    if (args.config.empty()) throw UsageError("--config is required");
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& o : args.overrides) overrides.push_back(io::parse_override(o));
    io::RunConfig cfg = io::load_config(args.config, overrides);
    apply_ablations(cfg, args.ablate);
    return cfg;
}

class MetricsFile {
public:
    explicit MetricsFile(const fs::path& path) : out_(path, std::ios::trunc) {
        if (!out_) throw InputError("cannot write " + path.string());
    }
    pipeline::MetricsSink sink() {
        return [this](const pipeline::MetricsRecord& r) { out_ << pipeline::to_json(r) << "\n" << std::flush; };
    }

private:
    std::ofstream out_;
};

struct StageOutcome {
    pipeline::MetricMap metrics;
    std::optional<std::string> failure;
};

/// Shared tail of pretrain / fine-tune: test evaluation, checkpoint, summary.
StageOutcome finish_run(const fs::path& dir, const io::RunConfig& cfg, std::uint64_t seed, const Prepared& data,
                        const pipeline::GaatModel& model, const pipeline::GraphInputs& inputs,
                        const pipeline::TrainResult& result, pipeline::Checkpoint ckpt, const pipeline::LossConfig& loss) {
    ckpt.info.source = data.identity;
    io::RunConfig resolved = cfg;
    resolved.seeds = {seed};
    ckpt.info.config_text = io::format_config(resolved);
    pipeline::save_checkpoint(dir / "model.ckpt", ckpt);

    const std::size_t m = data.task.full.num_edges();
    const auto test = pipeline::evaluate(model, inputs, data.task.split, graph::SplitName::test, loss, m);
    const auto val = pipeline::evaluate(model, inputs, data.task.split, graph::SplitName::val, loss, m);

    ordered_json s;
    s["dataset"] = cfg.data.name;
    s["stage"] = pipeline::to_string(model.stage);
    s["variant"] = model.ablation.variant();
    s["neg_ratio"] = cfg.data.neg_ratio;
    s["seed"] = seed;
    s["source"] = data.identity;
    s["epochs_run"] = result.epochs_run;
    s["best_epoch"] = result.best_epoch;
    s["best_val_auc"] = result.best_val_auc;
    s["val_auc"] = val.auc;
    s["val_f1"] = val.f1;
    s["test_auc"] = test.auc;
    s["test_f1"] = test.f1;
    s["test_ap"] = test.ap;
    s["seconds_per_epoch"] = result.mean_seconds_per_epoch;
    s["trainable_params"] = model.params.trainable_scalars();
    if (model.stage == pipeline::Stage::finetune) {
        s["pretrain_trainable_params"] = ckpt.info.pretrain_trainable_params;
        s["pretrain_fingerprint"] = ckpt.info.pretrain_fingerprint;
    }
    s["fingerprint"] = model.fingerprint();
    if (result.numeric_failure) s["numeric_failure"] = *result.numeric_failure;
    write_text(dir / "summary.json", s.dump(2) + "\n");
    std::cerr << pipeline::to_string(model.stage) << " seed " << seed << ": best epoch " << result.best_epoch
              << ", test AUC " << test.auc << ", F1 " << test.f1 << "\n";

    StageOutcome out;
    out.metrics = {{"test_auc", test.auc}, {"test_f1", test.f1}, {"test_ap", test.ap},
                   {"val_auc", val.auc},   {"best_epoch", result.best_epoch},
                   {"seconds_per_epoch", result.mean_seconds_per_epoch},
                   {"trainable_params", static_cast<double>(model.params.trainable_scalars())}};
    out.failure = result.numeric_failure;
    return out;
}

void write_inputs(const fs::path& dir, const Prepared& data) {
    graph::write_manifest(dir / "split.tsv", data.task.split, data.loaded.original_ids);
    embedding_container(data.x_init, data.loaded.original_ids).save(dir / "x_init.bin");
}

using SeedBody = std::function<StageOutcome(const fs::path&, std::uint64_t)>;

int run_all_seeds(const io::RunConfig& cfg, const fs::path& out, const SeedBody& body) {
    fs::create_directories(out);
    write_text(out / "config.ini", io::format_config(cfg));
    std::optional<std::string> failure;
    if (cfg.seeds.size() == 1) {
        const auto r = body(out, cfg.seeds[0]);
        failure = r.failure;
    } else {
        auto report = pipeline::run_seeds(
            [&](std::uint64_t seed) {
                const fs::path dir = out / ("seed_" + std::to_string(seed));
                fs::create_directories(dir);
                const auto r = body(dir, seed);
                if (r.failure) failure = r.failure;
                return r.metrics;
            },
            cfg.seeds);
        ordered_json agg;
        agg["seeds"] = cfg.seeds;
        for (const auto& row : report.rows) {
            ordered_json j;
            j["seed"] = row.seed;
            for (const auto& [k, v] : row.metrics) j[k] = v;
            if (row.error) j["error"] = *row.error;
            agg["rows"].push_back(j);
        }
        for (const auto& [k, v] : report.mean) agg["mean"][k] = v;
        for (const auto& [k, v] : report.stddev) agg["std"][k] = v;
        agg["failures"] = report.failures;
        write_text(out / "aggregate.json", agg.dump(2) + "\n");
        for (const auto& row : report.rows) {
            if (row.error) throw Error("seed " + std::to_string(row.seed) + " failed: " + *row.error);
        }
    }
    if (failure) throw NumericError(*failure + " (last good checkpoint kept)");
    return kOk;
}

}  // namespace

int cmd_split(const SplitArgs& args) {
    if (args.out.empty()) throw UsageError("--out is required");
    const auto loaded = graph::load_edge_list(args.edges);
    const auto task = graph::make_link_task(loaded.graph, args.neg_ratio, substream_seed(args.seed, "split"),
                                            parse_ratio(args.ratio));
    fs::create_directories(args.out);
    graph::write_manifest(fs::path(args.out) / "split.tsv", task.split, loaded.original_ids);
    std::string train_edges;
    for (const auto& e : task.train_view.edges()) {
        train_edges += std::to_string(loaded.original_ids[e.u]) + " " + std::to_string(loaded.original_ids[e.v]) + "\n";
    }
    write_text(fs::path(args.out) / "train_edges.txt", train_edges);
    const auto& s = task.split;
    std::cout << "train " << s.train_pos.size() << "+" << s.train_neg.size() << ", val " << s.val_pos.size() << "+"
              << s.val_neg.size() << ", test " << s.test_pos.size() << "+" << s.test_neg.size() << "\n";
    return kOk;
}

int cmd_embed(const EmbedArgs& args) {
    if (args.out.empty()) throw UsageError("--out is required");
    const auto loaded = graph::load_edge_list(args.edges);
    graph::Graph g = loaded.graph;
    if (!args.split.empty()) {
        g = graph::make_link_task(loaded.graph, graph::read_manifest(args.split, &loaded.internal_ids)).train_view;
    }
    n2v::Node2VecConfig cfg;
    cfg.dim = args.dim;
    cfg.walk_length = args.walk_length;
    cfg.walks_per_node = args.walks_per_node;
    cfg.epochs = args.epochs;
    cfg.p = args.p;
    cfg.q = args.q;
    const Matrix x = n2v::node2vec(g, cfg, substream_seed(args.seed, "node2vec"));
    embedding_container(x, loaded.original_ids).save(args.out);
    std::cout << "x_init " << x.rows() << " x " << x.cols() << "\n";
    return kOk;
}

int cmd_pretrain(const TrainArgs& args) {
    if (args.out.empty()) throw UsageError("--out is required");
    const io::RunConfig cfg = load_run_config(args);
    return run_all_seeds(cfg, args.out, [&](const fs::path& dir, std::uint64_t seed) {
        const Prepared data = prepare(cfg, seed);
        write_inputs(dir, data);
        const auto pcfg = cfg.pretrain_for(seed);
        MetricsFile metrics(dir / "metrics.jsonl");
        const auto run = pipeline::pretrain(data.task, data.x_init, pcfg, metrics.sink());
        return finish_run(dir, cfg, seed, data, run.model, run.inputs, run.result, run.checkpoint(), pcfg.loss);
    });
}

int cmd_finetune(const TrainArgs& args) {
    if (args.ckpt.empty()) throw UsageError("--ckpt is required");
    if (args.out.empty()) throw UsageError("--out is required");
    const io::RunConfig cfg = load_run_config(args);
    const auto source = pipeline::load_checkpoint(args.ckpt);
    return run_all_seeds(cfg, args.out, [&](const fs::path& dir, std::uint64_t seed) {
        const Prepared data = prepare(cfg, seed);
        write_inputs(dir, data);
        const auto fcfg = cfg.finetune_for(seed);
        MetricsFile metrics(dir / "metrics.jsonl");
        const auto run = pipeline::finetune(data.task, data.x_init, source, fcfg, metrics.sink());
        return finish_run(dir, cfg, seed, data, run.model, run.inputs, run.result, run.checkpoint(), fcfg.loss);
    });
}

int cmd_evaluate(const EvaluateArgs& args) {
    if (args.model.empty() || args.split.empty()) throw UsageError("--model and --split are required");
    const auto ckpt = pipeline::load_checkpoint(args.model);
    const fs::path emb_path = args.embedding.empty() ? fs::path(args.model).parent_path() / "x_init.bin" : fs::path(args.embedding);
    const Embedding emb = load_embedding(emb_path);
    const auto ids = invert(emb.ids);
    graph::EdgeSplit split = graph::read_manifest(args.split, &ids);
    std::vector<graph::Edge> all;
    for (auto s : {graph::SplitName::train, graph::SplitName::val, graph::SplitName::test}) {
        all.insert(all.end(), split.positives(s).begin(), split.positives(s).end());
    }
    const graph::Graph full(emb.ids.size(), all);
    const graph::LinkTask task = graph::make_link_task(full, std::move(split));

    pipeline::GraphInputs inputs = ckpt.model.stage == pipeline::Stage::pretrain
                                       ? pipeline::prepare_pretrain_inputs(task.train_view, emb.x, pipeline::pretrain_settings(ckpt))
                                       : pipeline::prepare_finetune_inputs(task.train_view, emb.x);
    pipeline::LossConfig loss;
    if (!ckpt.info.config_text.empty()) loss = io::parse_config(ckpt.info.config_text).loss;
    const auto record = pipeline::evaluate(ckpt.model, inputs, task.split, graph::parse_split_name(args.which), loss,
                                           full.num_edges());
    std::cout << pipeline::to_json(record) << "\n";
    return kOk;
}

int cmd_report(const ReportArgs& args) {
    using Key = std::tuple<std::string, std::string, std::string, double>;
    std::map<Key, std::vector<ordered_json>> groups;
    for (const std::string& dir : args.runs) {
        if (!fs::exists(dir)) throw InputError("no such run directory: " + dir);
        std::vector<fs::path> files;
        if (fs::is_regular_file(dir)) files.push_back(dir);
        else
            for (const auto& e : fs::recursive_directory_iterator(dir))
                if (e.is_regular_file() && e.path().filename() == "summary.json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f);
            ordered_json j;
            try {
                j = ordered_json::parse(in);
            } catch (const std::exception& e) {
                throw InputError("cannot parse " + f.string() + ": " + e.what());
            }
            groups[{j.value("dataset", ""), j.value("stage", ""), j.value("variant", ""), j.value("neg_ratio", 1.0)}]
                .push_back(j);
        }
    }
    if (groups.empty()) throw InputError("no run summaries found");

    const std::vector<std::string> metrics{"test_auc", "test_f1", "test_ap", "seconds_per_epoch", "trainable_params",
                                           "trainable_ratio"};
    auto stats = [](const std::vector<double>& xs) {
        pipeline::SeedReport r;
        for (double x : xs) r.rows.push_back({0, {{"x", x}}, std::nullopt});
        pipeline::aggregate(r);
        return std::pair{r.mean["x"], r.stddev["x"]};
    };
    const bool csv = args.format == "csv";
    if (!csv && args.format != "table") throw UsageError("--format must be table or csv");

    std::ostringstream out;
    if (csv) {
        out << "dataset,stage,variant,neg_ratio,runs";
        for (const auto& m : metrics) out << "," << m << "_mean," << m << "_std";
        out << "\n";
    } else {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-12s %-9s %-14s %5s %4s", "dataset", "stage", "variant", "neg", "runs");
        out << buf;
        for (const auto& m : metrics) {
            std::snprintf(buf, sizeof buf, " %22s", m.c_str());
            out << buf;
        }
        out << "\n";
    }
    for (const auto& [key, rows] : groups) {
        const auto& [dataset, stage, variant, ratio] = key;
        char buf[256];
        if (csv) {
            out << dataset << "," << stage << "," << variant << "," << ratio << "," << rows.size();
        } else {
            std::snprintf(buf, sizeof buf, "%-12s %-9s %-14s %5g %4zu", dataset.c_str(), stage.c_str(), variant.c_str(),
                          ratio, rows.size());
            out << buf;
        }
        for (const auto& m : metrics) {
            std::vector<double> xs;
            for (const auto& r : rows) {
                if (m == "trainable_ratio") {
                    const double pre = r.value("pretrain_trainable_params", 0.0);
                    if (pre > 0) xs.push_back(r.value("trainable_params", 0.0) / pre);
                } else if (r.contains(m)) {
                    xs.push_back(r[m].get<double>());
                }
            }
            if (xs.empty()) {
                out << (csv ? ",," : "                      -");
                continue;
            }
            const auto [mean, sd] = stats(xs);
            if (csv) {
                std::snprintf(buf, sizeof buf, ",%.6g,%.6g", mean, sd);
            } else {
                std::snprintf(buf, sizeof buf, " %22s", (std::to_string(mean).substr(0, 9) + " ± " + std::to_string(sd).substr(0, 7)).c_str());
            }
            out << buf;
        }
        out << "\n";
    }
    std::cout << out.str();
    return kOk;
}

int cmd_sbm(const SbmArgs& args) {
    if (args.out.empty()) throw UsageError("--out is required");
    const auto g = graph::stochastic_block_model(args.nodes, args.blocks, args.p_in, args.p_out, args.seed);
    graph::write_edge_list(args.out, g.edges());
    std::cout << "sbm n=" << g.num_nodes() << " m=" << g.num_edges() << "\n";
    return kOk;
}

}  // namespace gaat::cli
