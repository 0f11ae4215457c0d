#include "cfrec/tensor.hpp"

#include <unordered_set>
#include <utility>

namespace cfrec {

std::int64_t numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw InvalidShapeError("shape dimensions must be positive");
        n *= d;
    }
    return n;
}

Tensor Tensor::leaf(std::vector<int> shape, Vec values, bool requires_grad) {
    if (numel(shape) != values.size())
        throw InvalidShapeError("leaf: value count does not match shape");
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::leaf(std::vector<int> shape, const std::vector<double>& values,
                    bool requires_grad) {
    Vec v = Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
    return leaf(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    Vec v = Vec::Zero(numel(shape));
    return leaf(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double v) {
    Vec vals(1);
    vals[0] = v;
    return leaf({1}, std::move(vals), false);
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Tensor make_op_node(std::vector<int> shape, Vec values, std::vector<NodePtr> parents,
                    std::function<void(TensorNode&)> backward_fn) {
    if (numel(shape) != values.size())
        throw InvalidShapeError("make_op_node: value count does not match shape");
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    if (g_grad_enabled) {
        bool needs = false;
        for (const auto& p : parents)
            if (p->requires_grad) {
                needs = true;
                break;
            }
        if (needs) {
            n->requires_grad = true;
            n->parents = std::move(parents);
            n->backward = std::move(backward_fn);
        }
    }
    return Tensor(std::move(n));
}

void backward(const Tensor& root) {
    if (!root.defined()) throw InvalidArgumentError("backward: undefined tensor");
    if (root.size() != 1) throw InvalidShapeError("backward: root must be scalar");
    TensorNode* r = root.node().get();
    if (!r->requires_grad) return;  // nothing in the graph wants gradients

    // Iterative post-order DFS. Child-before-parent in `order`, so the
    // reverse sweep visits each node exactly once before its parents.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> visited;
    struct Frame {
        TensorNode* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({r, 0});
    visited.insert(r);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            TensorNode* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    r->ensure_grad();
    r->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* n = *it;
        if (n->backward) {
            n->ensure_grad();
            n->backward(*n);
        }
    }
}

}  // namespace cfrec
