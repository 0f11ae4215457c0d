#pragma once

#include <Eigen/Core>
#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

#include "cfrec/errors.hpp"

namespace cfrec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

struct TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

/// One node of the computation graph: a shaped double array stored flat in
/// row-major order, an optional gradient buffer of the same size, and the
/// local backward rule linking the node to its parents. Leaves have no
/// parents and no backward rule. The graph is acyclic by construction:
/// a node's parents always exist before the node does.
struct TensorNode {
    std::vector<int> shape;
    Vec values;
    Vec grad;  // size 0 until backward() touches this node
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(TensorNode&)> backward;

    std::int64_t size() const { return values.size(); }
    void ensure_grad() {
        if (grad.size() != values.size()) grad = Vec::Zero(values.size());
    }
};

std::int64_t numel(const std::vector<int>& shape);

/// Value-semantic handle to a graph node. Copies share the node.
class Tensor {
public:
    Tensor() = default;

    static Tensor leaf(std::vector<int> shape, Vec values, bool requires_grad = false);
    static Tensor leaf(std::vector<int> shape, const std::vector<double>& values,
                       bool requires_grad = false);
    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor scalar(double v);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const { return node_->shape; }
    int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    std::int64_t size() const { return node_->size(); }

    const Vec& values() const { return node_->values; }
    /// Mutable access; meaningful for leaves (parameters, grad_check probes).
    Vec& values_mut() { return node_->values; }
    const Vec& grad() const { return node_->grad; }
    bool has_grad() const { return node_->grad.size() == node_->values.size(); }
    void zero_grad() {
        if (node_) node_->grad = Vec::Zero(node_->values.size());
    }

    /// Scalar convenience: the single stored value.
    double value() const {
        if (size() != 1) throw InvalidShapeError("value(): tensor is not scalar");
        return node_->values[0];
    }

    bool requires_grad() const { return node_->requires_grad; }

    const NodePtr& node() const { return node_; }
    explicit Tensor(NodePtr n) : node_(std::move(n)) {}

private:
    NodePtr node_;
};

/// True while graph construction is enabled on this thread.
bool grad_enabled();

/// RAII guard that disables graph construction on the current thread;
/// ops then produce plain leaves (no parents, no backward).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

/// Builds an op node. Exposed so extensions and tests can register custom
/// rules; under NoGradGuard the parents and rule are dropped.
Tensor make_op_node(std::vector<int> shape, Vec values, std::vector<NodePtr> parents,
                    std::function<void(TensorNode&)> backward_fn);

/// Reverse-mode sweep from a scalar root: seeds the root gradient with 1 and
/// applies backward rules in reverse topological order. Accumulation order is
/// fixed by graph construction order, so repeated runs are bit-identical.
void backward(const Tensor& root);

}  // namespace cfrec
