#include "gaat/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gaat/error.hpp"

namespace gaat::ad {

namespace {

std::string shape_str(const Tensor& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) + " differ");
    }
}

bool needs(const Node& n, std::size_t i) { return n.inputs[i]->requires_grad; }
Node& in(const Node& n, std::size_t i) { return *n.inputs[i]; }

template <typename F, typename D>
Tensor unary(const Tensor& a, const char* op, F forward, D derivative) {
    Matrix out = a.value().unaryExpr(forward);
    return make_result(std::move(out), {a}, op, [derivative](Node& self) {
        Node& x = in(self, 0);
        x.accumulate(self.grad.cwiseProduct(x.value.binaryExpr(self.value, derivative)));
    });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: " + shape_str(a) + " * " + shape_str(b));
    Matrix out;
    out.noalias() = a.value() * b.value();
    return make_result(std::move(out), {a, b}, "matmul", [](Node& self) {
        if (needs(self, 0)) {
            Matrix g;
            g.noalias() = self.grad * in(self, 1).value.transpose();
            in(self, 0).accumulate(g);
        }
        if (needs(self, 1)) {
            Matrix g;
            g.noalias() = in(self, 0).value.transpose() * self.grad;
            in(self, 1).accumulate(g);
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    return make_result(a.value() + b.value(), {a, b}, "add", [](Node& self) {
        if (needs(self, 0)) in(self, 0).accumulate(self.grad);
        if (needs(self, 1)) in(self, 1).accumulate(self.grad);
    });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) {
        throw ShapeError("add_row: cannot broadcast " + shape_str(row) + " over " + shape_str(a));
    }
    Matrix out = a.value();
    out.rowwise() += row.value().row(0);
    return make_result(std::move(out), {a, row}, "add_row", [](Node& self) {
        if (needs(self, 0)) in(self, 0).accumulate(self.grad);
        if (needs(self, 1)) in(self, 1).accumulate(self.grad.colwise().sum());
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    return make_result(a.value() - b.value(), {a, b}, "sub", [](Node& self) {
        if (needs(self, 0)) in(self, 0).accumulate(self.grad);
        if (needs(self, 1)) in(self, 1).accumulate(-self.grad);
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    return make_result(a.value().cwiseProduct(b.value()), {a, b}, "mul", [](Node& self) {
        if (needs(self, 0)) in(self, 0).accumulate(self.grad.cwiseProduct(in(self, 1).value));
        if (needs(self, 1)) in(self, 1).accumulate(self.grad.cwiseProduct(in(self, 0).value));
    });
}

Tensor scale(const Tensor& a, double s) {
    return make_result(a.value() * s, {a}, "scale", [s](Node& self) { in(self, 0).accumulate(self.grad * s); });
}

Tensor add_scalar(const Tensor& a, double s) {
    return make_result(a.value().array() + s, {a}, "add_scalar", [](Node& self) { in(self, 0).accumulate(self.grad); });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const Eigen::Index rows = parts[0].rows();
    Eigen::Index cols = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    Eigen::Index offset = 0;
    for (const Tensor& p : parts) {
        out.middleCols(offset, p.cols()) = p.value();
        offset += p.cols();
    }
    return make_result(std::move(out), std::vector<Tensor>(parts.begin(), parts.end()), "concat_cols", [](Node& self) {
        Eigen::Index off = 0;
        for (std::size_t i = 0; i < self.inputs.size(); ++i) {
            const Eigen::Index c = in(self, i).value.cols();
            if (needs(self, i)) in(self, i).accumulate(self.grad.middleCols(off, c));
            off += c;
        }
    });
}

Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols: range out of bounds");
    return make_result(a.value().middleCols(start, count), {a}, "slice_cols", [start, count](Node& self) {
        in(self, 0).grad_buffer().middleCols(start, count) += self.grad;
    });
}

Tensor slice_rows(const Tensor& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.rows()) throw ShapeError("slice_rows: range out of bounds");
    return make_result(a.value().middleRows(start, count), {a}, "slice_rows", [start, count](Node& self) {
        in(self, 0).grad_buffer().middleRows(start, count) += self.grad;
    });
}

Tensor gather_rows(const Tensor& a, std::span<const std::int32_t> index) {
    Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] < 0 || index[k] >= a.rows()) throw ShapeError("gather_rows: index out of range");
        out.row(static_cast<Eigen::Index>(k)) = a.value().row(index[k]);
    }
    std::vector<std::int32_t> idx(index.begin(), index.end());
    return make_result(std::move(out), {a}, "gather_rows", [idx = std::move(idx)](Node& self) {
        Matrix& g = in(self, 0).grad_buffer();
        for (std::size_t k = 0; k < idx.size(); ++k) g.row(idx[k]) += self.grad.row(static_cast<Eigen::Index>(k));
    });
}

Tensor relu(const Tensor& a) {
    return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    return unary(a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor elu(const Tensor& a, double alpha) {
    return unary(a, "elu", [alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); },
                 [alpha](double x, double y) { return x > 0.0 ? 1.0 : y + alpha; });
}

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;

double gelu_value(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluK * x * x * x))); }

double gelu_derivative(double x) {
    const double t = std::tanh(kGeluC * (x + kGeluK * x * x * x));
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluK * x * x);
}

}  // namespace

Tensor gelu(const Tensor& a) {
    return unary(a, "gelu", gelu_value, [](double x, double) { return gelu_derivative(x); });
}

Tensor exp(const Tensor& a) {
    return unary(a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return unary(a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(
        a, "sigmoid",
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor square(const Tensor& a) {
    return unary(a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sum(const Tensor& a) {
    return make_result(Matrix::Constant(1, 1, a.value().sum()), {a}, "sum", [](Node& self) {
        Node& x = in(self, 0);
        x.accumulate(Matrix::Constant(x.value.rows(), x.value.cols(), self.grad(0, 0)));
    });
}

Tensor mean(const Tensor& a) {
    if (a.value().size() == 0) throw ShapeError("mean of an empty tensor");
    const auto count = static_cast<double>(a.value().size());
    return make_result(Matrix::Constant(1, 1, a.value().sum() / count), {a}, "mean", [count](Node& self) {
        Node& x = in(self, 0);
        x.accumulate(Matrix::Constant(x.value.rows(), x.value.cols(), self.grad(0, 0) / count));
    });
}

Tensor row_sum(const Tensor& a) {
    return make_result(a.value().rowwise().sum(), {a}, "row_sum", [](Node& self) {
        Node& x = in(self, 0);
        Matrix g(x.value.rows(), x.value.cols());
        g.colwise() = self.grad.col(0);
        x.accumulate(g);
    });
}

namespace {

// Backward of a row softmax given the probabilities P and upstream dP.
Matrix softmax_backward(const Matrix& p, const Matrix& dp) {
    Matrix g = p.cwiseProduct(dp);
    const Eigen::VectorXd dot = g.rowwise().sum();
    g.noalias() -= p.cwiseProduct(dot.replicate(1, p.cols()));
    return g;
}

void softmax_rows_inplace(Matrix& s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        auto row = s.row(i);
        const double m = row.maxCoeff();
        row = (row.array() - m).exp();
        row /= row.sum();
    }
}

}  // namespace

Tensor row_softmax_masked(const Tensor& a, const Mask& mask) {
    if (mask.rows() != a.rows() || mask.cols() != a.cols()) throw ShapeError("row_softmax_masked: mask shape mismatch");
    Matrix out = Matrix::Zero(a.rows(), a.cols());
    const Matrix& x = a.value();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (mask(i, j)) m = std::max(m, x(i, j));
        }
        if (!std::isfinite(m)) continue;
        double total = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (mask(i, j)) {
                out(i, j) = std::exp(x(i, j) - m);
                total += out(i, j);
            }
        }
        out.row(i) /= total;
    }
    return make_result(std::move(out), {a}, "row_softmax_masked",
                       [](Node& self) { in(self, 0).accumulate(softmax_backward(self.value, self.grad)); });
}

Tensor row_softmax(const Tensor& a) {
    Matrix out = a.value();
    softmax_rows_inplace(out);
    return make_result(std::move(out), {a}, "row_softmax",
                       [](Node& self) { in(self, 0).accumulate(softmax_backward(self.value, self.grad)); });
}

Tensor layer_norm(const Tensor& x, const Tensor& scale, const Tensor& shift, double eps) {
    const Eigen::Index c = x.cols();
    if (scale.rows() != 1 || scale.cols() != c || shift.rows() != 1 || shift.cols() != c) {
        throw ShapeError("layer_norm: scale/shift must be 1x" + std::to_string(c));
    }
    Matrix xhat(x.rows(), c);
    Eigen::VectorXd inv_std(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto row = x.value().row(i);
        const double mu = row.mean();
        const double var = (row.array() - mu).square().mean();
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        xhat.row(i) = (row.array() - mu) * inv_std[i];
    }
    Matrix out = xhat.array().rowwise() * scale.value().row(0).array();
    out.rowwise() += shift.value().row(0);
    return make_result(std::move(out), {x, scale, shift}, "layer_norm",
                       [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                           const Matrix& dy = self.grad;
                           if (needs(self, 2)) in(self, 2).accumulate(dy.colwise().sum());
                           if (needs(self, 1)) in(self, 1).accumulate(dy.cwiseProduct(xhat).colwise().sum());
                           if (needs(self, 0)) {
                               const Matrix dxhat = dy.array().rowwise() * in(self, 1).value.row(0).array();
                               const Eigen::VectorXd m1 = dxhat.rowwise().mean();
                               const Eigen::VectorXd m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
                               Matrix dx = dxhat;
                               dx.colwise() -= m1;
                               dx -= xhat.cwiseProduct(m2.replicate(1, xhat.cols()));
                               dx.array().colwise() *= inv_std.array();
                               in(self, 0).accumulate(dx);
                           }
                       });
}

Tensor dropout(const Tensor& a, double rate, bool train, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
    if (!train || rate == 0.0) return a;
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = uniform01(rng) < rate ? 0.0 : keep_scale;
    Matrix out = a.value().cwiseProduct(mask);
    return make_result(std::move(out), {a}, "dropout",
                       [mask = std::move(mask)](Node& self) { in(self, 0).accumulate(self.grad.cwiseProduct(mask)); });
}

Tensor row_normalize(const Tensor& a, double eps) {
    const Eigen::VectorXd norms = a.value().rowwise().norm();
    const Eigen::VectorXd denom = norms.cwiseMax(eps);
    Matrix out = a.value().array().colwise() / denom.array();
    return make_result(std::move(out), {a}, "row_normalize", [norms, denom, eps](Node& self) {
        const Matrix& y = self.value;
        Matrix g = self.grad;
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            if (norms[i] > eps) {
                const double d = y.row(i).dot(self.grad.row(i));
                g.row(i) -= d * y.row(i);
            }
            g.row(i) /= denom[i];
        }
        in(self, 0).accumulate(g);
    });
}

Tensor attention_probs(const Tensor& q, const Tensor& k, const Tensor& key_bias, double scale) {
    if (q.cols() != k.cols()) throw ShapeError("attention_probs: query/key widths differ");
    if (key_bias.rows() != k.rows() || key_bias.cols() != 1) {
        throw ShapeError("attention_probs: key bias must be " + std::to_string(k.rows()) + "x1");
    }
    Matrix s;
    s.noalias() = scale * (q.value() * k.value().transpose());
    s.rowwise() += key_bias.value().col(0).transpose();
    softmax_rows_inplace(s);
    return make_result(std::move(s), {q, k, key_bias}, "attention_probs", [scale](Node& self) {
        const Matrix ds = softmax_backward(self.value, self.grad);
        if (needs(self, 0)) {
            Matrix g;
            g.noalias() = scale * (ds * in(self, 1).value);
            in(self, 0).accumulate(g);
        }
        if (needs(self, 1)) {
            Matrix g;
            g.noalias() = scale * (ds.transpose() * in(self, 0).value);
            in(self, 1).accumulate(g);
        }
        if (needs(self, 2)) in(self, 2).accumulate(ds.colwise().sum().transpose());
    });
}

Tensor binary_cross_entropy(const Tensor& scores, std::span<const double> labels, double eps) {
    if (scores.cols() != 1 || static_cast<std::size_t>(scores.rows()) != labels.size()) {
        throw ShapeError("binary_cross_entropy: " + std::to_string(labels.size()) + " labels for scores " +
                         shape_str(scores));
    }
    if (labels.empty()) throw ShapeError("binary_cross_entropy: empty input");
    const auto n = static_cast<double>(labels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double c = std::clamp(scores.value()(static_cast<Eigen::Index>(i), 0), eps, 1.0 - eps);
        total -= labels[i] * std::log(c) + (1.0 - labels[i]) * std::log(1.0 - c);
    }
    std::vector<double> y(labels.begin(), labels.end());
    return make_result(Matrix::Constant(1, 1, total / n), {scores}, "binary_cross_entropy",
                       [y = std::move(y), eps, n](Node& self) {
                           const Matrix& s = in(self, 0).value;
                           Matrix g = Matrix::Zero(s.rows(), 1);
                           const double up = self.grad(0, 0) / n;
                           for (Eigen::Index i = 0; i < s.rows(); ++i) {
                               const double v = s(i, 0);
                               if (v <= eps || v >= 1.0 - eps) continue;
                               const double yi = y[static_cast<std::size_t>(i)];
                               g(i, 0) = -up * (yi / v - (1.0 - yi) / (1.0 - v));
                           }
                           in(self, 0).accumulate(g);
                       });
}

Tensor segment_logsumexp(const Tensor& values, std::span<const std::int32_t> segment, std::int32_t num_segments) {
    if (values.cols() != 1 || static_cast<std::size_t>(values.rows()) != segment.size()) {
        throw ShapeError("segment_logsumexp: values must be E x 1 with one segment id each");
    }
    const Matrix& v = values.value();
    Eigen::VectorXd peak = Eigen::VectorXd::Constant(num_segments, -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < segment.size(); ++k) {
        const auto s = segment[k];
        if (s < 0 || s >= num_segments) throw ShapeError("segment_logsumexp: segment id out of range");
        peak[s] = std::max(peak[s], v(static_cast<Eigen::Index>(k), 0));
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(num_segments);
    for (std::size_t k = 0; k < segment.size(); ++k) acc[segment[k]] += std::exp(v(static_cast<Eigen::Index>(k), 0) - peak[segment[k]]);
    Matrix out = Matrix::Zero(num_segments, 1);
    for (std::int32_t s = 0; s < num_segments; ++s) {
        if (acc[s] > 0.0) out(s, 0) = peak[s] + std::log(acc[s]);
    }
    std::vector<std::int32_t> seg(segment.begin(), segment.end());
    return make_result(std::move(out), {values}, "segment_logsumexp", [seg = std::move(seg)](Node& self) {
        const Matrix& v = in(self, 0).value;
        Matrix g(v.rows(), 1);
        for (Eigen::Index k = 0; k < v.rows(); ++k) {
            const auto s = seg[static_cast<std::size_t>(k)];
            g(k, 0) = self.grad(s, 0) * std::exp(v(k, 0) - self.value(s, 0));
        }
        in(self, 0).accumulate(g);
    });
}

}  // namespace gaat::ad
