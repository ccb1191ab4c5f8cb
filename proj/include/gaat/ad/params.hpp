#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gaat/ad/tensor.hpp"

namespace gaat::ad {

struct ParamEntry {
    std::string name;
    Tensor tensor;
    bool trainable = true;
    bool decay = true;  // L2 weight decay applies
    Matrix m, v;        // Adam moments
    long step = 0;
};

/// Named parameter registry, kept in insertion order.
class ModelParams {
public:
    ModelParams() = default;
    /// Copies are deep: the copy owns fresh leaves with equal values, flags and optimizer state.
    ModelParams(const ModelParams& other);
    ModelParams& operator=(const ModelParams& other);
    ModelParams(ModelParams&&) noexcept = default;
    ModelParams& operator=(ModelParams&&) noexcept = default;

    /// Adds a leaf parameter. Throws std::invalid_argument on a duplicate name.
    Tensor add(std::string name, Matrix value, bool decay = true);

    bool contains(std::string_view name) const;
    Tensor& get(std::string_view name);
    const Tensor& get(std::string_view name) const;
    ParamEntry& entry(std::string_view name);
    const ParamEntry& entry(std::string_view name) const;

    std::vector<ParamEntry>& entries() { return entries_; }
    const std::vector<ParamEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Sets the trainable flag of every entry whose name satisfies `pred`.
    /// Returns the number of trainable scalars afterwards.
    std::size_t set_trainable(const std::function<bool(const std::string&)>& pred, bool value);
    /// Explicit list; throws std::invalid_argument on an unknown name.
    std::size_t set_trainable(const std::vector<std::string>& names, bool value);
    std::size_t freeze_all();

    std::size_t trainable_scalars() const;
    std::size_t total_scalars() const;

    void zero_grad();

private:
    std::size_t index_of(std::string_view name) const;

    std::vector<ParamEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 5e-4;
};

/// One Adam update of every trainable entry, with weight decay added to the raw
/// gradient of entries flagged for decay. Clears all gradients afterwards.
/// Throws std::logic_error when a trainable entry has no gradient.
void adam_step(ModelParams& params, const AdamConfig& cfg);

}  // namespace gaat::ad
