#include "relprobe/encoders/lstm.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "relprobe/autodiff/init.hpp"
#include "relprobe/autodiff/ops.hpp"

namespace relprobe::enc {

template <class T>
Lstm<T>::Lstm(const LstmConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.input_dim == 0 || cfg.hidden == 0) {
    throw std::invalid_argument("lstm: input_dim and hidden must be positive");
  }
  std::mt19937_64 rng(seed);
  for (auto& g : gates_) {
    g.wx = ad::fan_in_param<T>({cfg.input_dim, cfg.hidden}, rng);
    g.wh = ad::fan_in_param<T>({cfg.hidden, cfg.hidden}, rng);
    g.b = ad::filled_param<T>({cfg.hidden}, T(0));
  }
}

template <class T>
ad::Tensor<T> Lstm<T>::encode(std::span<const MarketWindow> windows) const {
  using namespace ad;
  if (windows.empty()) throw std::invalid_argument("lstm: no windows");
  const std::size_t n = windows.size(), steps = windows[0].steps, p = windows[0].features;
  if (p != cfg_.input_dim) {
    throw std::invalid_argument("lstm: window has " + std::to_string(p) + " features, expected " +
                                std::to_string(cfg_.input_dim));
  }
  for (const auto& w : windows) {
    if (w.steps != steps || w.features != p || w.values.size() != steps * p || steps == 0) {
      throw std::invalid_argument("lstm: inconsistent window shapes");
    }
  }

  Tensor<T> h, c;
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<T> xt(n * p);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t f = 0; f < p; ++f) {
        const double v = windows[u].at(t, f);
        if (!std::isfinite(v)) {
          throw std::invalid_argument("lstm: non-finite input at step " + std::to_string(t) +
                                      " (window " + std::to_string(u) + ")");
        }
        xt[u * p + f] = static_cast<T>(v);
      }
    }
    auto x = Tensor<T>::constant({n, p}, std::move(xt));
    auto pre = [&](const Gate& g) {
      auto z = matmul(x, g.wx);
      if (h.defined()) z = add(z, matmul(h, g.wh));
      return add_rowvec(z, g.b);
    };
    auto i = sigmoid(pre(gates_[0]));
    auto f = sigmoid(pre(gates_[1]));
    auto g = tanh(pre(gates_[2]));
    auto o = sigmoid(pre(gates_[3]));
    c = c.defined() ? add(mul(f, c), mul(i, g)) : mul(i, g);
    h = mul(o, tanh(c));
  }
  return h;
}

template <class T>
void Lstm<T>::collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const {
  static constexpr const char* kNames[4] = {"input", "forget", "cell", "output"};
  for (std::size_t k = 0; k < 4; ++k) {
    const std::string base = prefix + kNames[k];
    out.push_back({base + ".wx", gates_[k].wx});
    out.push_back({base + ".wh", gates_[k].wh});
    out.push_back({base + ".b", gates_[k].b});
  }
}

template class Lstm<float>;
template class Lstm<double>;

}  // namespace relprobe::enc
