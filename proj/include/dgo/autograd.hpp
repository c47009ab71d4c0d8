#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dgo/tensor.hpp"

namespace dgo {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads the incoming gradient and accumulates into the parents' grads.
  std::function<void(const Tensor<T>&)> backward;

  void accumulate(const Tensor<T>& g) {
    if (grad.empty()) {
      grad = g;
    } else {
      grad += g;
    }
  }
  Tensor<T>& grad_buffer() {
    if (grad.empty()) grad = Tensor<T>(value.dims());
    return grad;
  }
};

/// Handle onto a node of the reverse-mode tape. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false) : node_(std::make_shared<Node<T>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  static Var parameter(Tensor<T> value) { return Var(std::move(value), true); }
  static Var constant(Tensor<T> value) { return Var(std::move(value), false); }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& grad_buffer() { return node_->grad_buffer(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad() { node_->grad = Tensor<T>(); }
  const std::vector<int>& dims() const { return node_->value.dims(); }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

  /// Same value, cut from the tape.
  Var detach() const { return Var(node_->value, false); }

  /// Scalar value of a single-element tensor.
  T item() const { return node_->value[0]; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Builds a result node. The closure is dropped when no parent needs grads.
template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents,
               std::function<void(const Tensor<T>&)> backward) {
  Var<T> out(std::move(value), false);
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (any) {
    auto& node = *out.node();
    node.requires_grad = true;
    for (const auto& p : parents) {
      if (p.requires_grad()) node.parents.push_back(p.node());
    }
    node.backward = std::move(backward);
  }
  return out;
}

/// Reverse sweep from a scalar. Leaf grads accumulate; intermediate grads are released.
template <typename T>
void backward(const Var<T>& loss);

}  // namespace dgo
