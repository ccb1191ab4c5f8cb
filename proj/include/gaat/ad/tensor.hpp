#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gaat/matrix.hpp"

namespace gaat::ad {

class Node;
using NodePtr = std::shared_ptr<Node>;

/// One recorded value in the computation. Leaves have no inputs; interior nodes
/// carry the vector-Jacobian product of the op that produced them.
class Node {
public:
    Matrix value;
    Matrix grad;  // empty until something flows into it
    bool requires_grad = false;
    std::vector<NodePtr> inputs;
    std::function<void(Node&)> backward_fn;
    const char* op = "leaf";

    bool is_leaf() const { return inputs.empty(); }

    /// Adds `g` into this node's gradient, allocating it on first use.
    void accumulate(const Matrix& g);
    Matrix& grad_buffer();
};

/// Handle to a node. Copies share the same node (and therefore the same gradient).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}

    /// Leaf that never receives gradient.
    static Tensor constant(Matrix value);
    /// Leaf that accumulates gradient (unless later frozen).
    static Tensor parameter(Matrix value);
    static Tensor scalar(double v) { return constant(Matrix::Constant(1, 1, v)); }

    bool defined() const { return node_ != nullptr; }
    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }
    const Matrix& value() const { return node_->value; }
    /// Mutable access for optimizers and checkpoint restore; do not use on interior nodes.
    Matrix& mutable_value() { return node_->value; }
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag);
    bool has_grad() const { return node_->grad.size() != 0; }
    const Matrix& grad() const { return node_->grad; }
    void zero_grad() { node_->grad.resize(0, 0); }

    const NodePtr& node() const { return node_; }

    /// Reverse sweep from this 1x1 tensor. Gradients accumulate into leaves;
    /// interior gradients are released once propagated.
    void backward() const;

private:
    NodePtr node_;
};

/// Creates an interior node. `fn` is only kept when some input requires gradient.
Tensor make_result(Matrix value, std::vector<Tensor> inputs, const char* op, std::function<void(Node&)> fn);

/// Throws NumericError when `m` contains NaN or Inf.
void check_finite(const Matrix& m, const char* op);

}  // namespace gaat::ad
