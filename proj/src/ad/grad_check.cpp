#include "gaat/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gaat::ad {

GradCheckResult grad_check(const ScalarFn& f, std::span<const Tensor> inputs, double eps) {
    std::vector<Tensor> xs(inputs.begin(), inputs.end());
    for (Tensor& x : xs) {
        if (!x.node()->is_leaf() || !x.requires_grad()) throw std::invalid_argument("grad_check inputs must be parameters");
        x.zero_grad();
    }
    f(xs).backward();

    GradCheckResult result;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Tensor& x = xs[i];
        const Matrix analytic = x.has_grad() ? x.grad() : Matrix::Zero(x.rows(), x.cols());
        Matrix& value = x.mutable_value();
        for (Eigen::Index k = 0; k < value.size(); ++k) {
            const double saved = value.data()[k];
            value.data()[k] = saved + eps;
            const double up = f(xs).item();
            value.data()[k] = saved - eps;
            const double down = f(xs).item();
            value.data()[k] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic.data()[k];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (err > result.max_rel_error) result = {err, i, k, a, numeric};
        }
        x.zero_grad();
    }
    return result;
}

}  // namespace gaat::ad
