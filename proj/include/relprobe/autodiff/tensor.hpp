#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace relprobe::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Read-only view of one operand handed to forward and vjp kernels.
template <class T>
struct ArgView {
  const Shape* shape;
  std::span<const T> value;

  std::size_t rows() const { return shape->size() == 2 ? (*shape)[0] : 1; }
  std::size_t cols() const { return shape->empty() ? 1 : shape->back(); }
};

template <class T>
using ForwardFn = std::function<void(std::span<const ArgView<T>> in, std::span<T> out)>;

// Accumulates (+=) the vector-Jacobian product into gin[i] for each input whose
// span is non-empty. Inputs that do not require grad get an empty span.
template <class T>
using VjpFn = std::function<void(std::span<const ArgView<T>> in, std::span<const T> out,
                                 std::span<const T> gout, std::span<const std::span<T>> gin)>;

template <class T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::string op;
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<Node>> inputs;
  ForwardFn<T> forward;
  VjpFn<T> vjp;

  bool is_leaf() const { return inputs.empty(); }
};

std::uint64_t next_sequence();

template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor constant(Shape shape, std::vector<T> data);
  static Tensor param(Shape shape, std::vector<T> data);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(T v) { return constant({1}, {v}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->value.size(); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t rows() const { return rank() == 2 ? node_->shape[0] : 1; }
  std::size_t cols() const { return node_->shape.back(); }
  bool requires_grad() const { return node_->requires_grad; }
  const std::string& op() const { return node_->op; }

  std::span<const T> value() const { return node_->value; }
  // Mutable access is for leaves only (optimizer updates, checkpoint loads).
  std::span<T> data();
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad; }
  void zero_grad();

  T item() const;
  T at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  // Same values, no history, no grad.
  Tensor detach() const { return constant(shape(), node_->value); }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Runs `forward` on the input values and records the op when any input
// requires grad. Primitives and user-defined ops both go through here.
template <class T>
Tensor<T> apply_op(std::string op, std::vector<Tensor<T>> inputs, Shape out_shape,
                   ForwardFn<T> forward, VjpFn<T> vjp);

// Ordered record of the ops reachable from a root, latest first.
template <class T>
class Tape {
 public:
  static Tape from(const Tensor<T>& root);

  const std::vector<Node<T>*>& reverse_order() const { return order_; }
  std::vector<Node<T>*> leaves() const;

  // Seeds d(root)/d(root) = 1 and replays every VJP in reverse order.
  void replay_backward();
  // Gradient state only; parameter values are untouched.
  void clear();

 private:
  Node<T>* root_ = nullptr;
  std::vector<Node<T>*> order_;
};

template <class T>
void backward(const Tensor<T>& loss);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace relprobe::ad
