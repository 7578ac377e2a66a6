#include "relprobe/autodiff/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace relprobe::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::uint64_t next_sequence() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

namespace {

template <class T>
std::shared_ptr<Node<T>> make_leaf(Shape shape, std::vector<T> data, bool requires_grad,
                                   const char* op) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must have rank >= 1");
  for (auto s : shape) {
    if (s == 0) throw std::invalid_argument("tensor shape " + shape_str(shape) + " has a zero dim");
  }
  if (numel(shape) != data.size()) {
    throw std::invalid_argument("tensor shape " + shape_str(shape) + " does not match " +
                                std::to_string(data.size()) + " values");
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->value.size(), T(0));
  node->op = op;
  node->seq = next_sequence();
  return node;
}

}  // namespace

template <class T>
Tensor<T> Tensor<T>::constant(Shape shape, std::vector<T> data) {
  return Tensor(make_leaf(std::move(shape), std::move(data), false, "constant"));
}

template <class T>
Tensor<T> Tensor<T>::param(Shape shape, std::vector<T> data) {
  return Tensor(make_leaf(std::move(shape), std::move(data), true, "leaf"));
}

template <class T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  std::vector<T> data(ad::numel(shape), T(0));
  return Tensor(make_leaf(std::move(shape), std::move(data), requires_grad,
                          requires_grad ? "leaf" : "constant"));
}

template <class T>
std::span<T> Tensor<T>::data() {
  if (!node_->is_leaf()) throw std::logic_error("data() is only writable on leaf tensors");
  return node_->value;
}

template <class T>
void Tensor<T>::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <class T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw std::invalid_argument("item() on non-scalar tensor " + shape_str(shape()));
  }
  return node_->value[0];
}

template <class T>
Tensor<T> apply_op(std::string op, std::vector<Tensor<T>> inputs, Shape out_shape,
                   ForwardFn<T> forward, VjpFn<T> vjp) {
  std::vector<ArgView<T>> views;
  views.reserve(inputs.size());
  bool any_grad = false;
  for (const auto& t : inputs) {
    views.push_back({&t.shape(), t.value()});
    any_grad = any_grad || t.requires_grad();
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(out_shape);
  node->value.assign(numel(node->shape), T(0));
  forward(views, node->value);
  node->op = std::move(op);
  node->seq = next_sequence();
  node->requires_grad = any_grad;
  if (any_grad) {
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.node_ptr());
    node->forward = std::move(forward);
    node->vjp = std::move(vjp);
  }
  return Tensor<T>(std::move(node));
}

template <class T>
Tape<T> Tape<T>::from(const Tensor<T>& root) {
  Tape tape;
  tape.root_ = root.node();
  if (!root.requires_grad()) return tape;
  std::unordered_set<Node<T>*> seen;
  std::vector<Node<T>*> stack{root.node()};
  while (!stack.empty()) {
    Node<T>* n = stack.back();
    stack.pop_back();
    if (!n->requires_grad || !seen.insert(n).second) continue;
    tape.order_.push_back(n);
    for (const auto& in : n->inputs) stack.push_back(in.get());
  }
  // Sequence numbers follow execution order, so descending seq is a valid
  // reverse topological order.
  std::sort(tape.order_.begin(), tape.order_.end(),
            [](const Node<T>* a, const Node<T>* b) { return a->seq > b->seq; });
  return tape;
}

template <class T>
std::vector<Node<T>*> Tape<T>::leaves() const {
  std::vector<Node<T>*> out;
  for (auto* n : order_) {
    if (n->is_leaf()) out.push_back(n);
  }
  return out;
}

template <class T>
void Tape<T>::replay_backward() {
  if (order_.empty()) return;
  for (auto* n : order_) {
    if (!n->is_leaf()) n->grad.assign(n->value.size(), T(0));
  }
  root_->grad[0] += T(1);

  std::vector<ArgView<T>> views;
  std::vector<std::span<T>> gins;
  for (auto* n : order_) {
    if (n->is_leaf()) continue;
    views.clear();
    gins.clear();
    for (const auto& in : n->inputs) {
      views.push_back({&in->shape, in->value});
      gins.push_back(in->requires_grad ? std::span<T>(in->grad) : std::span<T>());
    }
    n->vjp(views, n->value, n->grad, gins);
  }
  for (auto* n : order_) {
    if (!n->is_leaf()) {
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
}

template <class T>
void Tape<T>::clear() {
  for (auto* n : order_) std::fill(n->grad.begin(), n->grad.end(), T(0));
}

template <class T>
void backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) {
    throw std::invalid_argument("backward() needs a scalar loss, got shape " +
                                shape_str(loss.shape()));
  }
  Tape<T>::from(loss).replay_backward();
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template Tensor<float> apply_op(std::string, std::vector<Tensor<float>>, Shape, ForwardFn<float>,
                                VjpFn<float>);
template Tensor<double> apply_op(std::string, std::vector<Tensor<double>>, Shape,
                                 ForwardFn<double>, VjpFn<double>);
template void backward(const Tensor<float>&);
template void backward(const Tensor<double>&);

}  // namespace relprobe::ad
