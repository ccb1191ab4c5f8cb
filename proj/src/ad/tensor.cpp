#include "gaat/ad/tensor.hpp"

#include <cassert>
#include <string>
#include <unordered_set>

#include "gaat/error.hpp"

namespace gaat::ad {

void Node::accumulate(const Matrix& g) {
    if (grad.size() == 0) {
        grad = g;
    } else {
        grad += g;
    }
}

Matrix& Node::grad_buffer() {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
    return grad;
}

Tensor Tensor::constant(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Tensor(std::move(node));
}

double Tensor::item() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("item() on a non-scalar tensor");
    return node_->value(0, 0);
}

void Tensor::set_requires_grad(bool flag) {
    if (!node_->is_leaf()) throw std::logic_error("requires_grad can only be toggled on leaves");
    node_->requires_grad = flag;
    if (!flag) node_->grad.resize(0, 0);
}

void check_finite(const Matrix& m, const char* op) {
    if (!m.allFinite()) throw NumericError(std::string("non-finite value produced by ") + op);
}

Tensor make_result(Matrix value, std::vector<Tensor> inputs, const char* op, std::function<void(Node&)> fn) {
    check_finite(value, op);
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = op;
    bool needs = false;
    for (const Tensor& t : inputs) needs = needs || t.requires_grad();
    node->requires_grad = needs;
    if (needs) {
        node->inputs.reserve(inputs.size());
        for (Tensor& t : inputs) node->inputs.push_back(t.node());
        node->backward_fn = std::move(fn);
    }
    return Tensor(std::move(node));
}

void Tensor::backward() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("backward() requires a 1x1 loss");
    if (!node_->requires_grad) return;

    // Iterative post-order DFS gives a topological order of the nodes that need gradient.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::unordered_set<Node*> on_stack;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    on_stack.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->inputs.size()) {
            Node* child = n->inputs[next++].get();
            if (!child->requires_grad) continue;
            assert(!on_stack.contains(child) && "cycle in computation graph");
            if (visited.insert(child).second) {
                on_stack.insert(child);
                stack.emplace_back(child, 0);
            }
        } else {
            on_stack.erase(n);
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->accumulate(Matrix::Ones(1, 1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->is_leaf() || n->grad.size() == 0) continue;
        n->backward_fn(*n);
        n->grad.resize(0, 0);
    }
}

}  // namespace gaat::ad
