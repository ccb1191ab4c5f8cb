#pragma once

#include <Eigen/Core>

namespace gaat {

/// Row-major dense double matrix used throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace gaat
