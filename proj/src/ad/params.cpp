#include "gaat/ad/params.hpp"

#include <cmath>
#include <stdexcept>

namespace gaat::ad {

ModelParams::ModelParams(const ModelParams& other) : entries_(other.entries_), index_(other.index_) {
    for (ParamEntry& e : entries_) {
        const bool flag = e.tensor.requires_grad();
        e.tensor = Tensor::parameter(e.tensor.value());
        e.tensor.set_requires_grad(flag);
    }
}

ModelParams& ModelParams::operator=(const ModelParams& other) {
    if (this != &other) *this = ModelParams(other);
    return *this;
}

Tensor ModelParams::add(std::string name, Matrix value, bool decay) {
    if (index_.contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    index_.emplace(name, entries_.size());
    ParamEntry e;
    e.name = std::move(name);
    e.tensor = Tensor::parameter(std::move(value));
    e.decay = decay;
    entries_.push_back(std::move(e));
    return entries_.back().tensor;
}

bool ModelParams::contains(std::string_view name) const { return index_.contains(std::string(name)); }

std::size_t ModelParams::index_of(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + std::string(name));
    return it->second;
}

ParamEntry& ModelParams::entry(std::string_view name) { return entries_[index_of(name)]; }
const ParamEntry& ModelParams::entry(std::string_view name) const { return entries_[index_of(name)]; }

Tensor& ModelParams::get(std::string_view name) { return entry(name).tensor; }
const Tensor& ModelParams::get(std::string_view name) const { return entry(name).tensor; }

std::size_t ModelParams::set_trainable(const std::function<bool(const std::string&)>& pred, bool value) {
    for (ParamEntry& e : entries_) {
        if (pred(e.name)) {
            e.trainable = value;
            e.tensor.set_requires_grad(value);
        }
    }
    return trainable_scalars();
}

std::size_t ModelParams::set_trainable(const std::vector<std::string>& names, bool value) {
    for (const std::string& n : names) {
        ParamEntry& e = entry(n);
        e.trainable = value;
        e.tensor.set_requires_grad(value);
    }
    return trainable_scalars();
}

std::size_t ModelParams::freeze_all() {
    return set_trainable([](const std::string&) { return true; }, false);
}

std::size_t ModelParams::trainable_scalars() const {
    std::size_t total = 0;
    for (const ParamEntry& e : entries_) {
        if (e.trainable) total += static_cast<std::size_t>(e.tensor.value().size());
    }
    return total;
}

std::size_t ModelParams::total_scalars() const {
    std::size_t total = 0;
    for (const ParamEntry& e : entries_) total += static_cast<std::size_t>(e.tensor.value().size());
    return total;
}

void ModelParams::zero_grad() {
    for (ParamEntry& e : entries_) e.tensor.zero_grad();
}

void adam_step(ModelParams& params, const AdamConfig& cfg) {
    for (ParamEntry& e : params.entries()) {
        if (!e.trainable) continue;
        if (!e.tensor.has_grad()) throw std::logic_error("trainable parameter without gradient: " + e.name);
    }
    for (ParamEntry& e : params.entries()) {
        if (!e.trainable) continue;
        Matrix& w = e.tensor.mutable_value();
        Matrix g = e.tensor.grad();
        if (e.decay && cfg.weight_decay != 0.0) g += cfg.weight_decay * w;
        if (e.m.size() == 0) {
            e.m = Matrix::Zero(w.rows(), w.cols());
            e.v = Matrix::Zero(w.rows(), w.cols());
        }
        ++e.step;
        e.m = cfg.beta1 * e.m + (1.0 - cfg.beta1) * g;
        e.v = cfg.beta2 * e.v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(e.step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(e.step));
        w.array() -= cfg.lr * (e.m.array() / c1) / ((e.v.array() / c2).sqrt() + cfg.eps);
    }
    params.zero_grad();
}

}  // namespace gaat::ad
