#include "relprobe/trainer/adam.hpp"

#include <cmath>
#include <map>

namespace relprobe::train {

template <class T>
Adam<T>::Adam(std::vector<ad::NamedTensor<T>> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    if (!p.tensor.requires_grad() || !p.tensor.node()->is_leaf()) {
      throw std::invalid_argument("adam: '" + p.name + "' is not a trainable leaf");
    }
    m_.emplace_back(p.tensor.numel(), T(0));
    v_.emplace_back(p.tensor.numel(), T(0));
  }
}

template <class T>
void Adam<T>::step(double lr) {
  for (const auto& p : params_) {
    for (T g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw NonFiniteGradient(p.name);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  const T b1 = T(cfg_.beta1), b2 = T(cfg_.beta2);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto leaf = params_[i].tensor;
    auto x = leaf.data();
    auto g = leaf.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < x.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T mhat = T(double(m[j]) / c1);
      const T vhat = T(double(v[j]) / c2);
      x[j] -= T(lr) * mhat / (std::sqrt(vhat) + T(cfg_.eps));
    }
  }
}

template <class T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) {
    auto t = p.tensor;
    t.zero_grad();
  }
}

template <class T>
std::vector<ad::NamedArray> Adam<T>::state() const {
  std::vector<ad::NamedArray> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& shape = params_[i].tensor.shape();
    out.push_back({"adam.m." + params_[i].name, shape, {m_[i].begin(), m_[i].end()}});
    out.push_back({"adam.v." + params_[i].name, shape, {v_[i].begin(), v_[i].end()}});
  }
  out.push_back({"adam.t", {1}, {float(t_)}});
  return out;
}

template <class T>
void Adam<T>::load_state(const std::vector<ad::NamedArray>& entries) {
  std::map<std::string, const ad::NamedArray*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  auto find = [&](const std::string& name) -> const ad::NamedArray& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::runtime_error("adam state: missing entry '" + name + "'");
    return *it->second;
  };
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& m = find("adam.m." + params_[i].name);
    const auto& v = find("adam.v." + params_[i].name);
    if (m.data.size() != m_[i].size() || v.data.size() != v_[i].size()) {
      throw std::runtime_error("adam state: size mismatch for '" + params_[i].name + "'");
    }
    m_[i].assign(m.data.begin(), m.data.end());
    v_[i].assign(v.data.begin(), v.data.end());
  }
  t_ = std::size_t(find("adam.t").data.at(0));
}

template class Adam<float>;
template class Adam<double>;

}  // namespace relprobe::train
