#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gaat/ad/tensor.hpp"

namespace gaat::ad {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_input = 0;
    Eigen::Index worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

using ScalarFn = std::function<Tensor(std::span<const Tensor>)>;

/// Compares the recorded gradient of the scalar `f` with central differences for every
/// coordinate of every input. Relative error is |a - b| / max(|a|, |b|, 1e-8).
/// Inputs must be leaves that require gradient; their values are restored afterwards.
GradCheckResult grad_check(const ScalarFn& f, std::span<const Tensor> inputs, double eps = 1e-5);

}  // namespace gaat::ad
