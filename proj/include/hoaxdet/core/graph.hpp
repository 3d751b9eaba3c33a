#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "hoaxdet/core/tensor.hpp"

namespace hoaxdet::ad {

template <typename Scalar>
class Graph;

/// Handle to a node recorded on a Graph.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Graph<Scalar>* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph<Scalar>& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  const Tensor<Scalar>& value() const { return graph_->value(id_); }
  const Shape& shape() const { return value().shape(); }
  const RowMatrix<Scalar>& matrix() const { return value().matrix(); }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph<Scalar>* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of operations recorded during one forward pass.
///
/// Nodes are appended in creation order, which is a topological order, so the
/// reverse sweep in backward() visits each contributing node once. Parameter
/// leaves are bound to caller-owned tensors; their gradients accumulate into
/// the tensor's own buffer across backward calls until the caller zeroes them.
/// Gradients of intermediate nodes are reset at the start of each backward.
template <typename Scalar>
class Graph {
 public:
  using Matrix = RowMatrix<Scalar>;
  using BackwardFn = std::function<void(Graph&, const Matrix&)>;

  Graph() = default;
  /// With `track_gradients` false no backward closures are recorded
  /// (inference mode).
  explicit Graph(bool track_gradients) : track_gradients_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<Scalar> constant(Tensor<Scalar> value) {
    Node node;
    node.owned = std::move(value);
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
  }

  Var<Scalar> parameter(Tensor<Scalar>& tensor) {
    Node node;
    node.external = &tensor;
    node.requires_grad = track_gradients_ && tensor.requires_grad();
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
  }

  /// Records the result of an operation. `fn` receives d(loss)/d(output) and
  /// must accumulate into the inputs through grad().
  Var<Scalar> record(Tensor<Scalar> value, std::initializer_list<Var<Scalar>> inputs, BackwardFn fn) {
    return record(std::move(value), std::vector<Var<Scalar>>(inputs), std::move(fn));
  }

  Var<Scalar> record(Tensor<Scalar> value, const std::vector<Var<Scalar>>& inputs, BackwardFn fn) {
    Node node;
    node.owned = std::move(value);
    for (const auto& in : inputs) {
      if (&in.graph() != this) throw ContractError("operation mixes nodes from different graphs");
      node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(fn);
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
  }

  const Tensor<Scalar>& value(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return n.external ? *n.external : n.owned;
  }

  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  bool requires_grad(const Var<Scalar>& v) const { return requires_grad(v.id()); }

  /// Gradient accumulator of a node, zero-allocated on first use.
  Matrix& grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.external) return n.external->grad();
    if (!n.grad) n.grad = Matrix::Zero(n.owned.matrix().rows(), n.owned.matrix().cols());
    return *n.grad;
  }
  Matrix& grad(const Var<Scalar>& v) { return grad(v.id()); }

  /// Back-propagates from a scalar loss into every parameter that feeds it.
  void backward(const Var<Scalar>& loss) {
    if (&loss.graph() != this) throw ContractError("loss belongs to a different graph");
    if (loss.value().size() != 1) {
      throw ContractError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
    }
    for (Node& n : nodes_) n.grad.reset();
    if (!nodes_[loss.id()].requires_grad) return;
    grad(loss.id()).setConstant(Scalar(1));
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (!n.backward || !n.grad) continue;
      n.backward(*this, *n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<Scalar> owned;
    Tensor<Scalar>* external = nullptr;
    bool requires_grad = false;
    std::optional<Matrix> grad;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool track_gradients_ = true;
};

}  // namespace hoaxdet::ad
