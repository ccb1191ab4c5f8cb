#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gaat/node2vec.hpp"
#include "gaat/pipeline/config.hpp"

namespace gaat::io {

struct DataConfig {
    std::string name = "graph";
    std::string edges;      // edge-list file
    std::string split;      // optional manifest; generated from the seed when empty
    std::string embedding;  // optional cached x_init container
    double neg_ratio = 1.0;
    std::array<std::size_t, 3> ratios{8, 1, 1};
};

/// Everything a CLI run needs. Text form is `key = value` lines grouped under
/// `[section]` headers; see README for the key list.
struct RunConfig {
    DataConfig data;
    n2v::Node2VecConfig node2vec;
    pipeline::PretrainConfig pretrain;
    pipeline::FinetuneConfig finetune;
    // Shared by both stages; copied in by pretrain_for / finetune_for.
    pipeline::LossConfig loss;
    pipeline::Ablation ablation;
    std::vector<std::uint64_t> seeds{1};

    /// Stage settings with the run seed, shared loss/ablation and input width applied.
    pipeline::PretrainConfig pretrain_for(std::uint64_t seed) const;
    pipeline::FinetuneConfig finetune_for(std::uint64_t seed) const;
};

/// Throws InputError on unknown keys, unknown sections, or unparsable values.
/// `overrides` are (section.key, value) pairs applied on top of the text.
RunConfig parse_config(std::string_view text, const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Splits "section.key=value"; throws InputError when there is no '='.
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Every key with its resolved value; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& cfg);

/// Documented key list: (section.key, description).
std::vector<std::pair<std::string, std::string>> config_keys();

}  // namespace gaat::io
