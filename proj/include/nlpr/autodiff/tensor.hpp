#ifndef NLPR_AUTODIFF_TENSOR_HPP
#define NLPR_AUTODIFF_TENSOR_HPP

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nlpr/error.hpp"

namespace nlpr::ad {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct Node {
  Matrix<Scalar> value;
  Matrix<Scalar> grad;  // empty until a backward pass reaches the node
  bool requires_grad = false;
  bool leaf = true;
  std::string name;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> propagate;

  void ensure_grad() {
    if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
      grad = Matrix<Scalar>::Zero(value.rows(), value.cols());
    }
  }
};

/// Handle to a node of a define-by-run differentiation graph.
///
/// Storage is a rank-2 row-major matrix; vectors are n x 1 or 1 x n and scalars 1 x 1.
/// Copies share the node, so a parameter handle held by a model and the handle used
/// inside an expression refer to the same value and gradient buffers.
template <typename Scalar>
class BasicTensor {
 public:
  using NodeType = Node<Scalar>;
  using MatrixType = Matrix<Scalar>;

  BasicTensor() = default;
  explicit BasicTensor(std::shared_ptr<NodeType> node) : node_(std::move(node)) {}

  /// Leaf that never receives gradients.
  static BasicTensor constant(MatrixType value) {
    auto node = std::make_shared<NodeType>();
    node->value = std::move(value);
    return BasicTensor(std::move(node));
  }

  /// Trainable leaf; gradients accumulate into it across backward passes.
  static BasicTensor parameter(MatrixType value, std::string name = {}) {
    auto node = std::make_shared<NodeType>();
    node->value = std::move(value);
    node->requires_grad = true;
    node->name = std::move(name);
    return BasicTensor(std::move(node));
  }

  static BasicTensor scalar(Scalar v) {
    MatrixType m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
  }

  bool defined() const { return static_cast<bool>(node_); }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  std::vector<Index> shape() const { return {rows(), cols()}; }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }

  const MatrixType& value() const { return node_->value; }
  MatrixType& mutable_value() { return node_->value; }
  Scalar item() const {
    if (!is_scalar()) throw ContractError("item() on non-scalar tensor " + shape_string());
    return node_->value(0, 0);
  }

  /// Gradient buffer; zeros of the value's shape if no backward pass has touched it.
  const MatrixType& grad() const {
    node_->ensure_grad();
    return node_->grad;
  }
  MatrixType& mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() { node_->grad = MatrixType::Zero(rows(), cols()); }

  bool requires_grad() const { return node_->requires_grad; }
  /// Freezes or unfreezes a leaf. Has no effect on already-recorded graphs.
  void set_requires_grad(bool on) {
    if (!node_->leaf) throw ContractError("set_requires_grad on a non-leaf tensor");
    node_->requires_grad = on;
  }
  const std::string& name() const { return node_->name; }
  NodeType* node() const { return node_.get(); }
  const std::shared_ptr<NodeType>& node_ptr() const { return node_; }

  std::string shape_string() const {
    std::ostringstream os;
    os << "[" << rows() << "x" << cols() << "]";
    return os.str();
  }

 private:
  std::shared_ptr<NodeType> node_;
};

using Tensor = BasicTensor<double>;

template <typename Scalar>
bool all_finite(const BasicTensor<Scalar>& t) {
  return t.value().allFinite();
}

/// Builds the result node of an operation. When no input requires gradients the result
/// is a plain constant and no backward closure is kept.
template <typename Scalar, typename Propagate>
BasicTensor<Scalar> make_result(Matrix<Scalar> value,
                                std::initializer_list<BasicTensor<Scalar>> inputs,
                                Propagate&& propagate) {
  auto node = std::make_shared<Node<Scalar>>();
  node->value = std::move(value);
  node->leaf = false;
  for (const auto& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    for (const auto& in : inputs) node->parents.push_back(in.node_ptr());
    node->propagate = std::forward<Propagate>(propagate);
  }
  return BasicTensor<Scalar>(std::move(node));
}

template <typename Scalar, typename Propagate>
BasicTensor<Scalar> make_result(Matrix<Scalar> value,
                                const std::vector<BasicTensor<Scalar>>& inputs,
                                Propagate&& propagate) {
  auto node = std::make_shared<Node<Scalar>>();
  node->value = std::move(value);
  node->leaf = false;
  for (const auto& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    for (const auto& in : inputs) node->parents.push_back(in.node_ptr());
    node->propagate = std::forward<Propagate>(propagate);
  }
  return BasicTensor<Scalar>(std::move(node));
}

/// Topologically ordered record of the operations that produced a tensor.
template <typename Scalar>
class Graph {
 public:
  using NodeType = Node<Scalar>;

  explicit Graph(const BasicTensor<Scalar>& output) {
    // Iterative post-order DFS; parents always precede children in order_.
    std::unordered_set<NodeType*> seen;
    std::vector<std::pair<NodeType*, std::size_t>> stack;
    if (output.requires_grad()) {
      stack.emplace_back(output.node(), 0);
      seen.insert(output.node());
    }
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        NodeType* parent = node->parents[next++].get();
        if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
      } else {
        order_.push_back(node);
        stack.pop_back();
      }
    }
  }

  /// Nodes in topological order (inputs first, output last).
  const std::vector<NodeType*>& nodes() const { return order_; }

  /// Reverse-mode sweep seeded with d(output)/d(output) = 1. Intermediate gradients are
  /// reset at the start of every sweep; leaf gradients accumulate.
  void backward(std::vector<NodeType*>* visit_log = nullptr) const {
    if (order_.empty()) return;
    for (NodeType* n : order_) {
      if (!n->leaf) n->grad = Matrix<Scalar>::Zero(n->value.rows(), n->value.cols());
    }
    NodeType* out = order_.back();
    out->ensure_grad();
    out->grad.array() += Scalar(1);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      if (visit_log) visit_log->push_back(*it);
      if ((*it)->propagate) (*it)->propagate(**it);
    }
  }

 private:
  std::vector<NodeType*> order_;
};

/// Populates gradients of every requires-grad leaf reachable from a scalar loss.
template <typename Scalar>
void backward(const BasicTensor<Scalar>& loss) {
  if (!loss.defined() || !loss.is_scalar()) {
    throw ContractError("backward() requires a scalar loss, got " +
                        (loss.defined() ? loss.shape_string() : std::string("undefined")));
  }
  Graph<Scalar>(loss).backward();
}

}  // namespace nlpr::ad

#endif  // NLPR_AUTODIFF_TENSOR_HPP
