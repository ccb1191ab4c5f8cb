#include "gaat/pipeline/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "gaat/error.hpp"

namespace gaat::pipeline {

namespace {

using Settings = std::map<std::string, std::string>;

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string encode(const Settings& s) {
    std::string out;
    for (const auto& [k, v] : s) out += k + "=" + v + "\n";
    return out;
}

Settings decode(const std::string& text) {
    Settings s;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        s[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return s;
}

const std::string& need(const Settings& s, const std::string& key) {
    const auto it = s.find(key);
    if (it == s.end()) throw InputError("checkpoint is missing setting " + key);
    return it->second;
}

int get_int(const Settings& s, const std::string& key) {
    try {
        return std::stoi(need(s, key));
    } catch (const std::logic_error&) {
        throw InputError("checkpoint setting " + key + " is not an integer");
    }
}

double get_double(const Settings& s, const std::string& key) {
    try {
        return std::stod(need(s, key));
    } catch (const std::logic_error&) {
        throw InputError("checkpoint setting " + key + " is not a number");
    }
}

std::uint64_t get_u64(const Settings& s, const std::string& key) {
    try {
        return std::stoull(need(s, key));
    } catch (const std::logic_error&) {
        throw InputError("checkpoint setting " + key + " is not an integer");
    }
}

std::string join_names(const ad::ModelParams& p, bool want_trainable, bool decay_list) {
    std::string out;
    for (const auto& e : p.entries()) {
        const bool pick = decay_list ? !e.decay : e.trainable == want_trainable;
        if (pick) out += e.name + "\n";
    }
    return out;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

}  // namespace

io::ParamContainer to_container(const Checkpoint& ckpt) {
    const GaatModel& m = ckpt.model;
    const CheckpointInfo& info = ckpt.info;
    Settings s;
    s["stage"] = to_string(m.stage);
    s["input_dim"] = std::to_string(m.model.input_dim);
    s["gat_heads"] = std::to_string(m.model.gat_heads);
    s["gat_head_dim"] = std::to_string(m.model.gat_head_dim);
    s["encoder_layers"] = std::to_string(m.model.encoder_layers);
    s["encoder_heads"] = std::to_string(m.model.encoder_heads);
    s["ffn_dim"] = std::to_string(m.model.ffn_dim);
    s["out_dim"] = std::to_string(m.model.out_dim);
    s["dropout"] = fmt_double(m.model.dropout);
    s["psi_init"] = fmt_double(m.model.psi_init);
    s["adapter_dim"] = std::to_string(m.adapter_dim);
    s["non_aug"] = std::to_string(m.ablation.non_aug);
    s["non_ft"] = std::to_string(m.ablation.non_ft);
    s["non_sa"] = std::to_string(m.ablation.non_sa);
    s["non_con"] = std::to_string(m.ablation.non_con);
    s["score_dot"] = std::to_string(m.ablation.score_dot);
    s["best_val_auc"] = fmt_double(info.best_val_auc);
    s["best_epoch"] = std::to_string(info.best_epoch);
    s["trainable_params"] = std::to_string(info.trainable_params);
    s["pretrain_trainable_params"] = std::to_string(info.pretrain_trainable_params);
    s["seed"] = std::to_string(info.seed);
    s["alpha"] = fmt_double(info.alpha);
    s["diffusion_steps"] = std::to_string(info.diffusion_steps);
    std::string hops;
    for (int h : info.hops) hops += (hops.empty() ? "" : ",") + std::to_string(h);
    s["hops"] = hops;
    s["distant_per_node"] = std::to_string(info.distant_per_node);

    io::ParamContainer c;
    c.add_text("meta.settings", encode(s));
    c.add_text("meta.fingerprint", m.fingerprint());
    c.add_text("meta.architecture", m.architecture());
    c.add_text("meta.source", info.source);
    c.add_text("meta.pretrain_fingerprint", info.pretrain_fingerprint);
    c.add_text("meta.trainable", join_names(m.params, true, false));
    c.add_text("meta.no_decay", join_names(m.params, false, true));
    c.add_text("meta.config", info.config_text);
    for (const auto& e : m.params.entries()) c.add_matrix("param." + e.name, e.tensor.value());
    return c;
}

Checkpoint from_container(const io::ParamContainer& c) {
    const Settings s = decode(c.text("meta.settings"));
    Checkpoint ckpt;
    GaatModel& m = ckpt.model;
    m.stage = parse_stage(need(s, "stage"));
    m.model.input_dim = get_int(s, "input_dim");
    m.model.gat_heads = get_int(s, "gat_heads");
    m.model.gat_head_dim = get_int(s, "gat_head_dim");
    m.model.encoder_layers = get_int(s, "encoder_layers");
    m.model.encoder_heads = get_int(s, "encoder_heads");
    m.model.ffn_dim = get_int(s, "ffn_dim");
    m.model.out_dim = get_int(s, "out_dim");
    m.model.dropout = get_double(s, "dropout");
    m.model.psi_init = get_double(s, "psi_init");
    m.adapter_dim = get_int(s, "adapter_dim");
    m.ablation.non_aug = get_int(s, "non_aug") != 0;
    m.ablation.non_ft = get_int(s, "non_ft") != 0;
    m.ablation.non_sa = get_int(s, "non_sa") != 0;
    m.ablation.non_con = get_int(s, "non_con") != 0;
    m.ablation.score_dot = get_int(s, "score_dot") != 0;

    CheckpointInfo& info = ckpt.info;
    info.source = c.text("meta.source");
    info.pretrain_fingerprint = c.text("meta.pretrain_fingerprint");
    info.config_text = c.text("meta.config");
    info.best_val_auc = get_double(s, "best_val_auc");
    info.best_epoch = get_int(s, "best_epoch");
    info.trainable_params = get_u64(s, "trainable_params");
    info.pretrain_trainable_params = get_u64(s, "pretrain_trainable_params");
    info.seed = get_u64(s, "seed");
    info.alpha = get_double(s, "alpha");
    info.diffusion_steps = get_int(s, "diffusion_steps");
    std::istringstream hs(need(s, "hops"));
    for (std::string h; std::getline(hs, h, ',');) info.hops.push_back(std::stoi(h));
    info.distant_per_node = get_u64(s, "distant_per_node");

    const auto no_decay = lines(c.text("meta.no_decay"));
    for (const std::string& name : c.names()) {
        if (!name.starts_with("param.")) continue;
        const std::string pname = name.substr(6);
        const bool decay = std::find(no_decay.begin(), no_decay.end(), pname) == no_decay.end();
        m.params.add(pname, c.matrix(name), decay);
    }
    m.params.freeze_all();
    try {
        m.params.set_trainable(lines(c.text("meta.trainable")), true);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("checkpoint trainable list: ") + e.what());
    }
    if (m.fingerprint() != c.text("meta.fingerprint")) {
        throw InputError("checkpoint fingerprint does not match its recorded architecture");
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) { to_container(ckpt).save(path); }

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expected_fingerprint,
                           bool allow_mismatch) {
    Checkpoint ckpt = from_container(io::ParamContainer::load(path));
    if (!expected_fingerprint.empty() && !allow_mismatch && ckpt.model.fingerprint() != expected_fingerprint) {
        throw InputError("checkpoint " + path.string() + " has fingerprint " + ckpt.model.fingerprint() +
                         ", expected " + expected_fingerprint);
    }
    return ckpt;
}

PretrainConfig pretrain_settings(const Checkpoint& ckpt) {
    PretrainConfig cfg;
    cfg.model = ckpt.model.model;
    cfg.ablation = ckpt.model.ablation;
    cfg.alpha = ckpt.info.alpha;
    cfg.diffusion_steps = ckpt.info.diffusion_steps;
    cfg.hops = ckpt.info.hops;
    cfg.distant_per_node = ckpt.info.distant_per_node;
    cfg.seed = ckpt.info.seed;
    return cfg;
}

}  // namespace gaat::pipeline
