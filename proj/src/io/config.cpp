#include "gaat/io/config.hpp"

#include <charconv>
#include <concepts>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gaat/error.hpp"

namespace gaat::io {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw InputError("config key " + key + ": '" + value + "' is not " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
    return out;
}

std::vector<std::string> split_list(const std::string& value, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream ss(value);
    while (std::getline(ss, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) parts.push_back(cur);
    }
    return parts;
}

template <typename Range>
std::string join(const Range& xs, char sep) {
    std::string out;
    for (const auto& x : xs) {
        if (!out.empty()) out += sep;
        out += std::to_string(x);
    }
    return out;
}

// Value <-> text for every field type used by the schema.
struct Codec {
    static std::string write(const std::string& v) { return v; }
    static std::string write(bool v) { return v ? "true" : "false"; }
    static std::string write(double v) { return fmt_double(v); }
    template <std::integral T>
    static std::string write(T v) { return std::to_string(v); }
    static std::string write(const std::vector<int>& v) { return join(v, ','); }
    static std::string write(const std::vector<std::uint64_t>& v) { return join(v, ','); }
    static std::string write(const std::array<std::size_t, 3>& v) { return join(v, ':'); }
    static std::string write(const std::optional<double>& v) { return v ? fmt_double(*v) : "auto"; }
    static std::string write(obj::Denominator d) { return d == obj::Denominator::global ? "global" : "per_anchor"; }

    static void read(const std::string&, const std::string& s, std::string& v) { v = s; }
    static void read(const std::string& k, const std::string& s, bool& v) {
        if (s == "true" || s == "1" || s == "yes") v = true;
        else if (s == "false" || s == "0" || s == "no") v = false;
        else bad_value(k, s, "a boolean");
    }
    static void read(const std::string& k, const std::string& s, double& v) { v = parse_number<double>(k, s); }
    template <std::integral T>
    static void read(const std::string& k, const std::string& s, T& v) { v = parse_number<T>(k, s); }
    static void read(const std::string& k, const std::string& s, std::vector<int>& v) {
        v.clear();
        for (const auto& p : split_list(s, ',')) v.push_back(parse_number<int>(k, p));
    }
    static void read(const std::string& k, const std::string& s, std::vector<std::uint64_t>& v) {
        v.clear();
        for (const auto& p : split_list(s, ',')) v.push_back(parse_number<std::uint64_t>(k, p));
    }
    static void read(const std::string& k, const std::string& s, std::array<std::size_t, 3>& v) {
        const auto parts = split_list(s, ':');
        if (parts.size() != 3) bad_value(k, s, "a ratio a:b:c");
        for (std::size_t i = 0; i < 3; ++i) v[i] = parse_number<std::size_t>(k, parts[i]);
    }
    static void read(const std::string& k, const std::string& s, std::optional<double>& v) {
        if (s == "auto") v.reset();
        else v = parse_number<double>(k, s);
    }
    static void read(const std::string& k, const std::string& s, obj::Denominator& v) {
        if (s == "per_anchor") v = obj::Denominator::per_anchor;
        else if (s == "global") v = obj::Denominator::global;
        else bad_value(k, s, "per_anchor or global");
    }
};

/// Calls v(key, doc, field) for every schema entry, in file order.
template <typename Visitor>
void visit(RunConfig& c, Visitor&& v) {
    v("data.name", "dataset label used in reports", c.data.name);
    v("data.edges", "edge-list file", c.data.edges);
    v("data.split", "split manifest; generated from the seed when empty", c.data.split);
    v("data.embedding", "cached x_init container; computed with node2vec when empty", c.data.embedding);
    v("data.neg_ratio", "negatives per positive in every split", c.data.neg_ratio);
    v("data.ratios", "train:val:test positive ratio", c.data.ratios);

    v("node2vec.dim", "embedding width (model input width)", c.node2vec.dim);
    v("node2vec.p", "return parameter", c.node2vec.p);
    v("node2vec.q", "in-out parameter", c.node2vec.q);
    v("node2vec.walk_length", "nodes per walk", c.node2vec.walk_length);
    v("node2vec.walks_per_node", "walks started at each node", c.node2vec.walks_per_node);
    v("node2vec.window", "skip-gram context window", c.node2vec.window);
    v("node2vec.negatives", "noise samples per positive pair", c.node2vec.negatives);
    v("node2vec.epochs", "skip-gram passes over the corpus", c.node2vec.epochs);
    v("node2vec.lr", "initial skip-gram learning rate", c.node2vec.lr);

    auto& m = c.pretrain.model;
    v("model.gat_heads", "attention heads of the first layer", m.gat_heads);
    v("model.gat_head_dim", "output width per head", m.gat_head_dim);
    v("model.encoder_layers", "transformer encoder layers", m.encoder_layers);
    v("model.encoder_heads", "transformer attention heads", m.encoder_heads);
    v("model.ffn_dim", "transformer feed-forward width", m.ffn_dim);
    v("model.out_dim", "width of the output attention head", m.out_dim);
    v("model.dropout", "dropout rate", m.dropout);
    v("model.psi_init", "initial value of every score weight", m.psi_init);

    auto& p = c.pretrain;
    v("pretrain.epochs", "maximum epochs", p.optim.epochs);
    v("pretrain.patience", "early-stop patience on validation AUC", p.optim.patience);
    v("pretrain.lr", "Adam learning rate", p.optim.adam.lr);
    v("pretrain.weight_decay", "L2 coefficient", p.optim.adam.weight_decay);
    v("pretrain.alpha", "diffusion mixing coefficient", p.alpha);
    v("pretrain.diffusion_steps", "diffusion iterations", p.diffusion_steps);
    v("pretrain.hops", "exact hop distances for distant neighbors", p.hops);
    v("pretrain.distant_per_node", "distant neighbors sampled per node", p.distant_per_node);

    auto& f = c.finetune;
    v("finetune.epochs", "maximum epochs", f.optim.epochs);
    v("finetune.patience", "early-stop patience on validation AUC", f.optim.patience);
    v("finetune.lr", "Adam learning rate", f.optim.adam.lr);
    v("finetune.weight_decay", "L2 coefficient", f.optim.adam.weight_decay);
    v("finetune.adapter_dim", "self-adapter bottleneck width", f.adapter_dim);
    v("finetune.random_backbone", "replace the loaded backbone by a random frozen one", f.random_backbone);
    v("finetune.allow_fingerprint_mismatch", "accept checkpoints built with another architecture", f.allow_fingerprint_mismatch);

    v("loss.lambda", "contrastive weight; auto picks 0.5, or 0.7 above 1e5 edges", c.loss.lambda);
    v("loss.tau", "contrastive temperature", c.loss.tau);
    v("loss.denominator", "per_anchor or global contrastive denominator", c.loss.denominator);

    v("ablation.non_aug", "pretrain without diffusion", c.ablation.non_aug);
    v("ablation.non_ft", "pretrain without the transformer encoder", c.ablation.non_ft);
    v("ablation.non_sa", "fine-tune without the self-adapter", c.ablation.non_sa);
    v("ablation.non_con", "drop the contrastive term", c.ablation.non_con);
    v("ablation.score_dot", "dot-product scoring", c.ablation.score_dot);

    v("run.seeds", "comma-separated run seeds", c.seeds);
}

}  // namespace

pipeline::PretrainConfig RunConfig::pretrain_for(std::uint64_t seed) const {
    pipeline::PretrainConfig p = pretrain;
    p.model.input_dim = node2vec.dim;
    p.loss = loss;
    p.ablation = ablation;
    p.seed = seed;
    return p;
}

pipeline::FinetuneConfig RunConfig::finetune_for(std::uint64_t seed) const {
    pipeline::FinetuneConfig f = finetune;
    f.loss = loss;
    f.ablation = ablation;
    f.seed = seed;
    return f;
}

RunConfig parse_config(std::string_view text, const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::map<std::string, std::string> values;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw InputError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        if (!values.emplace(full, trim(line.substr(eq + 1))).second) throw InputError(where + ": duplicate key " + full);
    }

    for (const auto& [k, v] : overrides) values[k] = v;

    RunConfig cfg;
    visit(cfg, [&](const char* key, const char*, auto& field) {
        const auto it = values.find(key);
        if (it == values.end()) return;
        Codec::read(key, it->second, field);
        values.erase(it);
    });
    if (!values.empty()) throw InputError("unknown config key: " + values.begin()->first);
    if (cfg.seeds.empty()) throw InputError("run.seeds must list at least one seed");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw InputError("override '" + std::string(text) + "' is not key=value");
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

std::string format_config(const RunConfig& cfg) {
    RunConfig copy = cfg;
    std::string out, section;
    visit(copy, [&](const char* key, const char*, auto& field) {
        const std::string_view k(key);
        const auto dot = k.find('.');
        const std::string sec(k.substr(0, dot));
        if (sec != section) {
            if (!out.empty()) out += '\n';
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += std::string(k.substr(dot + 1)) + " = " + Codec::write(field) + "\n";
    });
    return out;
}

std::vector<std::pair<std::string, std::string>> config_keys() {
    std::vector<std::pair<std::string, std::string>> keys;
    RunConfig cfg;
    visit(cfg, [&](const char* key, const char* doc, auto& field) {
        keys.emplace_back(key, std::string(doc) + " (default " + Codec::write(field) + ")");
    });
    return keys;
}

}  // namespace gaat::io
