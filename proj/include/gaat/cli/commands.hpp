#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gaat::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInput = 2,
    kSampling = 3,
    kDegenerateGraph = 4,
    kNumeric = 5,
};

/// Runs `body`, printing any exception to stderr and mapping it to an exit code.
int guarded(const std::function<int()>& body);

struct SplitArgs {
    std::string edges;
    std::uint64_t seed = 1;
    std::string ratio = "8:1:1";
    double neg_ratio = 1.0;
    std::string out;
};
/// Writes <out>/split.tsv and <out>/train_edges.txt.
int cmd_split(const SplitArgs& args);

struct EmbedArgs {
    std::string edges;
    std::string split;  // optional: embed the training view of this manifest
    int dim = 256;
    std::uint64_t seed = 1;
    int walk_length = 80;
    int walks_per_node = 10;
    int epochs = 5;
    double p = 1.0;
    double q = 1.0;
    std::string out;
};
/// Writes a container with entries "x_init" (n x dim) and "node_ids" (file id per row).
int cmd_embed(const EmbedArgs& args);

struct TrainArgs {
    std::string config;
    std::string ckpt;  // fine-tune only
    std::string out;
    std::vector<std::string> ablate;     // non_aug | non_ft | non_sa | non_con | score_dot
    std::vector<std::string> overrides;  // section.key=value
};
int cmd_pretrain(const TrainArgs& args);
int cmd_finetune(const TrainArgs& args);

struct EvaluateArgs {
    std::string model;
    std::string split;
    std::string embedding;  // defaults to x_init.bin next to the model
    std::string which = "test";
};
/// Prints one metrics record as JSON on stdout.
int cmd_evaluate(const EvaluateArgs& args);

struct ReportArgs {
    std::vector<std::string> runs;
    std::string format = "table";
};
/// Groups every summary.json below the given directories by (dataset, stage, variant, neg_ratio).
int cmd_report(const ReportArgs& args);

struct SbmArgs {
    std::size_t nodes = 200;
    std::size_t blocks = 2;
    double p_in = 0.2;
    double p_out = 0.01;
    std::uint64_t seed = 1;
    std::string out;
};
/// Writes a stochastic block model edge list.
int cmd_sbm(const SbmArgs& args);

}  // namespace gaat::cli
