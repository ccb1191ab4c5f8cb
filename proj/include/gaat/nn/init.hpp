#pragma once

#include <cmath>

#include "gaat/matrix.hpp"
#include "gaat/rng.hpp"

namespace gaat::nn {

/// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
inline Matrix xavier_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * a;
    return m;
}

}  // namespace gaat::nn
