#include "relprobe/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace relprobe::ad {

template <class T>
std::string GradcheckReport<T>::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " (tol " << tol << ")";
  if (non_finite_op) os << " non-finite value produced by op '" << *non_finite_op << "'";
  for (const auto& p : params) os << "\n  " << p.name << ": max rel err " << p.max_rel_error;
  for (const auto& op : failing_ops) os << "\n  failing op: " << op;
  return os.str();
}

namespace {

double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)});
}

template <class T>
bool all_finite(std::span<const T> v) {
  return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
}

// Directional check of one recorded op: <g, J d> by central differences
// versus <vjp(g), d>.
template <class T>
double local_op_error(const Node<T>& node, T step, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t k = node.inputs.size();
  std::vector<std::vector<T>> dirs(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!node.inputs[i]->requires_grad) continue;
    dirs[i].resize(node.inputs[i]->value.size());
    for (auto& d : dirs[i]) d = T(nd(rng));
  }
  std::vector<T> cot(node.value.size());
  for (auto& c : cot) c = T(nd(rng));

  auto eval_shifted = [&](T sign) {
    std::vector<std::vector<T>> shifted(k);
    std::vector<ArgView<T>> views;
    for (std::size_t i = 0; i < k; ++i) {
      shifted[i] = node.inputs[i]->value;
      if (!dirs[i].empty())
        for (std::size_t j = 0; j < shifted[i].size(); ++j) shifted[i][j] += sign * step * dirs[i][j];
    }
    for (std::size_t i = 0; i < k; ++i) views.push_back({&node.inputs[i]->shape, shifted[i]});
    std::vector<T> out(node.value.size(), T(0));
    node.forward(views, out);
    double s = 0;
    for (std::size_t j = 0; j < out.size(); ++j) s += double(cot[j]) * double(out[j]);
    return s;
  };
  const double numeric = (eval_shifted(T(1)) - eval_shifted(T(-1))) / (2.0 * double(step));

  std::vector<ArgView<T>> views;
  std::vector<std::vector<T>> gbuf(k);
  std::vector<std::span<T>> gins;
  for (std::size_t i = 0; i < k; ++i) {
    views.push_back({&node.inputs[i]->shape, node.inputs[i]->value});
    if (!dirs[i].empty()) gbuf[i].assign(dirs[i].size(), T(0));
    gins.push_back(gbuf[i]);
  }
  node.vjp(views, node.value, cot, gins);
  double analytic = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < dirs[i].size(); ++j) analytic += double(gbuf[i][j]) * double(dirs[i][j]);
  return rel_error(analytic, numeric);
}

}  // namespace

template <class T>
GradcheckReport<T> gradcheck(const std::function<Tensor<T>()>& f,
                             const std::vector<NamedTensor<T>>& inputs, T step, T tol) {
  GradcheckReport<T> report;
  report.tol = double(tol);
  for (const auto& in : inputs) {
    if (!in.tensor.requires_grad() || !in.tensor.node()->is_leaf()) {
      throw std::invalid_argument("gradcheck: input '" + in.name + "' is not a grad leaf");
    }
  }

  std::vector<std::vector<T>> saved_grads;
  for (const auto& in : inputs) {
    saved_grads.emplace_back(in.tensor.grad().begin(), in.tensor.grad().end());
    auto t = in.tensor;
    t.zero_grad();
  }

  const Tensor<T> out = f();
  if (out.numel() != 1) throw std::invalid_argument("gradcheck: f must return a scalar");
  const auto tape = Tape<T>::from(out);
  {
    // Forward order is the reverse of the tape order.
    const auto& order = tape.reverse_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (!all_finite<T>((*it)->value)) {
        report.non_finite_op = (*it)->op;
        report.pass = false;
        break;
      }
    }
    if (!report.non_finite_op && !std::isfinite(out.item())) {
      report.non_finite_op = out.op();
      report.pass = false;
    }
  }
  if (report.non_finite_op) return report;

  backward(out);
  std::vector<std::vector<T>> analytic;
  for (const auto& in : inputs) analytic.emplace_back(in.tensor.grad().begin(), in.tensor.grad().end());

  for (std::size_t p = 0; p < inputs.size(); ++p) {
    auto leaf = inputs[p].tensor;
    auto data = leaf.data();
    double worst = 0;
    for (std::size_t j = 0; j < data.size(); ++j) {
      const T orig = data[j];
      data[j] = orig + step;
      const double fp = double(f().item());
      data[j] = orig - step;
      const double fm = double(f().item());
      data[j] = orig;
      const double numeric = (fp - fm) / (2.0 * double(step));
      worst = std::max(worst, rel_error(double(analytic[p][j]), numeric));
    }
    report.params.push_back({inputs[p].name, worst});
    if (!(worst <= double(tol))) report.pass = false;
  }

  if (!report.pass) {
    std::mt19937_64 rng(0x5eed);
    for (auto* n : tape.reverse_order()) {
      if (n->is_leaf()) continue;
      if (!(local_op_error(*n, step, rng) <= double(tol))) {
        if (std::find(report.failing_ops.begin(), report.failing_ops.end(), n->op) ==
            report.failing_ops.end()) {
          report.failing_ops.push_back(n->op);
        }
      }
    }
  }

  for (std::size_t p = 0; p < inputs.size(); ++p) {
    auto t = inputs[p].tensor;
    auto g = t.mutable_grad();
    std::copy(saved_grads[p].begin(), saved_grads[p].end(), g.begin());
  }
  return report;
}

template struct GradcheckReport<float>;
template struct GradcheckReport<double>;
template GradcheckReport<float> gradcheck(const std::function<Tensor<float>()>&,
                                          const std::vector<NamedTensor<float>>&, float, float);
template GradcheckReport<double> gradcheck(const std::function<Tensor<double>()>&,
                                           const std::vector<NamedTensor<double>>&, double, double);

}  // namespace relprobe::ad
