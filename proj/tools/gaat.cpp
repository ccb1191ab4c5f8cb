#include <iostream>

#include "CLI11.hpp"

#include "gaat/cli/commands.hpp"

using namespace gaat::cli;

int main(int argc, char** argv) {
    CLI::App app{"Graph attention link prediction with pretraining and adapter fine-tuning"};
    app.require_subcommand(1);

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "Split edges into train/val/test positives and sample negatives");
    c_split->add_option("--edges", split.edges, "Edge-list file")->required();
    c_split->add_option("--seed", split.seed, "Run seed");
    c_split->add_option("--ratio", split.ratio, "Positive split ratio")->capture_default_str();
    c_split->add_option("--neg-ratio", split.neg_ratio, "Negatives per positive")->capture_default_str();
    c_split->add_option("--out", split.out, "Output directory")->required();

    EmbedArgs embed;
    auto* c_embed = app.add_subcommand("embed", "Compute node2vec embeddings");
    c_embed->add_option("--edges", embed.edges, "Edge-list file")->required();
    c_embed->add_option("--split", embed.split, "Embed the training view of this manifest");
    c_embed->add_option("--dim", embed.dim, "Embedding width")->capture_default_str();
    c_embed->add_option("--seed", embed.seed, "Run seed");
    c_embed->add_option("--walk-length", embed.walk_length)->capture_default_str();
    c_embed->add_option("--walks-per-node", embed.walks_per_node)->capture_default_str();
    c_embed->add_option("--epochs", embed.epochs)->capture_default_str();
    c_embed->add_option("--p", embed.p, "Return parameter")->capture_default_str();
    c_embed->add_option("--q", embed.q, "In-out parameter")->capture_default_str();
    c_embed->add_option("--out", embed.out, "Output container")->required();

    TrainArgs pre;
    auto* c_pre = app.add_subcommand("pretrain", "Pretrain the full network on a source graph");
    c_pre->add_option("--config", pre.config, "Run config")->required();
    c_pre->add_option("--out", pre.out, "Run directory")->required();
    c_pre->add_option("--ablate", pre.ablate, "non_aug|non_ft|non_sa|non_con|score_dot");
    c_pre->add_option("--set", pre.overrides, "Config override section.key=value");

    TrainArgs fine;
    auto* c_fine = app.add_subcommand("finetune", "Fine-tune a pretrained checkpoint on a target graph");
    c_fine->add_option("--config", fine.config, "Run config")->required();
    c_fine->add_option("--ckpt", fine.ckpt, "Pretrain checkpoint")->required();
    c_fine->add_option("--out", fine.out, "Run directory")->required();
    c_fine->add_option("--ablate", fine.ablate, "non_aug|non_ft|non_sa|non_con|score_dot");
    c_fine->add_option("--set", fine.overrides, "Config override section.key=value");

    EvaluateArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "Evaluate a saved model on a split");
    c_eval->add_option("--model", eval.model, "Checkpoint")->required();
    c_eval->add_option("--split", eval.split, "Split manifest")->required();
    c_eval->add_option("--embedding", eval.embedding, "x_init container (default: next to the model)");
    c_eval->add_option("--which", eval.which, "train|val|test")->capture_default_str();

    ReportArgs report;
    auto* c_report = app.add_subcommand("report", "Aggregate run summaries");
    c_report->add_option("--runs", report.runs, "Run directories")->required();
    c_report->add_option("--format", report.format, "table|csv")->capture_default_str();

    SbmArgs sbm;
    auto* c_sbm = app.add_subcommand("sbm", "Generate a stochastic block model edge list");
    c_sbm->add_option("--nodes", sbm.nodes)->capture_default_str();
    c_sbm->add_option("--blocks", sbm.blocks)->capture_default_str();
    c_sbm->add_option("--p-in", sbm.p_in)->capture_default_str();
    c_sbm->add_option("--p-out", sbm.p_out)->capture_default_str();
    c_sbm->add_option("--seed", sbm.seed)->capture_default_str();
    c_sbm->add_option("--out", sbm.out, "Output edge list")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    return guarded([&] {
        if (*c_split) return cmd_split(split);
        if (*c_embed) return cmd_embed(embed);
        if (*c_pre) return cmd_pretrain(pre);
        if (*c_fine) return cmd_finetune(fine);
        if (*c_eval) return cmd_evaluate(eval);
        if (*c_report) return cmd_report(report);
        return cmd_sbm(sbm);
    });
}
