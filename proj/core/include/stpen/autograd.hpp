#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "stpen/tensor.hpp"

namespace stpen {

struct Node;

/// Propagates `self.grad` into the gradients of `self.parents`.
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;

  /// Zero-initialised gradient buffer of the value's shape.
  Tensor& grad_buffer();
};

/// Handle to a node of the reverse-mode graph. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  /// Graph input that does not receive gradients.
  static Var constant(Tensor value);
  /// Graph input that accumulates gradients.
  static Var leaf(Tensor value);

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }

  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient, or zeros when nothing reached this node.
  Tensor grad() const;
  void zero_grad() { node_->grad = Tensor(); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Creates an op result. The graph edge is recorded only when a parent needs gradients.
Var make_op(Tensor value, std::vector<Var> parents, BackwardFn backward);

/// Reverse pass seeded with ones; `root` must hold a single element.
void backward(const Var& root);
void backward(const Var& root, const Tensor& seed);

}  // namespace stpen
