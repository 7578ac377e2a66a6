#include "relprobe/gat/gat.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "relprobe/autodiff/init.hpp"
#include "relprobe/autodiff/ops.hpp"

namespace relprobe::gat {

template <class T>
GatParams<T> GatParams<T>::make(const GatConfig& cfg, std::uint64_t seed) {
  if (cfg.layers == 0) throw std::invalid_argument("gat: need at least one layer");
  std::mt19937_64 rng(seed);
  GatParams p;
  p.cfg = cfg;
  std::size_t d_in = cfg.in_dim;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    GatLayerParams<T> layer;
    layer.w = ad::fan_in_param<T>({d_in, cfg.hidden}, rng);
    layer.a = ad::fan_in_param<T>({2 * cfg.hidden, 1}, rng);
    p.layers.push_back(layer);
    d_in = cfg.hidden;
  }
  p.wo = ad::fan_in_param<T>({cfg.hidden, kClasses}, rng);
  p.bo = ad::filled_param<T>({kClasses}, T(0));
  return p;
}

template <class T>
void GatParams<T>::collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = prefix + "layer" + std::to_string(l);
    out.push_back({base + ".w", layers[l].w});
    out.push_back({base + ".a", layers[l].a});
  }
  out.push_back({prefix + "wo", wo});
  out.push_back({prefix + "bo", bo});
}

template <class T>
LayerOutput<T> gat_layer(const GatLayerParams<T>& layer, const ad::Tensor<T>& h,
                         const graph::DailyGraph<T>& g, double negative_slope) {
  using namespace ad;
  const std::size_t n = g.n;
  if (h.rank() != 2 || h.rows() != n) {
    throw std::invalid_argument("gat_layer: features " + shape_str(h.shape()) +
                                " do not match graph of " + std::to_string(n) + " nodes");
  }
  const std::size_t d_out = layer.w.cols();
  if (layer.a.numel() != 2 * d_out) {
    throw std::invalid_argument("gat_layer: attention vector must have 2*d_out entries");
  }
  auto wh = matmul(h, layer.w);
  std::vector<std::size_t> first(d_out), second(d_out);
  std::iota(first.begin(), first.end(), std::size_t{0});
  std::iota(second.begin(), second.end(), d_out);
  auto s_self = matmul(wh, gather_rows(layer.a, first));    // N x 1
  auto s_nbr = matmul(wh, gather_rows(layer.a, second));    // N x 1
  auto ones_row = Tensor<T>::constant({1, n}, std::vector<T>(n, T(1)));
  auto ones_col = Tensor<T>::constant({n, 1}, std::vector<T>(n, T(1)));
  auto e = leaky_relu(add(matmul(s_self, ones_row), matmul(ones_col, transpose(s_nbr))),
                      T(negative_slope));
  const auto ev = e.value();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (!std::isfinite(ev[i])) {
      throw std::runtime_error("gat_layer: non-finite attention logit at (" +
                               std::to_string(i / n) + "," + std::to_string(i % n) + ")");
    }
  }

  Mask neighborhood = g.adjacency;
  std::vector<T> off_diag(n * n, T(1)), eye(n * n, T(0));
  for (std::size_t u = 0; u < n; ++u) {
    neighborhood[u * n + u] = 1;
    off_diag[u * n + u] = T(0);
    eye[u * n + u] = T(1);
  }
  auto alpha = masked_row_softmax(e, neighborhood);
  auto edge_w = add(mul(g.weights, Tensor<T>::constant({n, n}, std::move(off_diag))),
                    Tensor<T>::constant({n, n}, std::move(eye)));
  auto out = elu(matmul(mul(alpha, edge_w), wh));
  return {out, alpha};
}

template <class T>
ad::Tensor<T> logits(const GatParams<T>& params, const ad::Tensor<T>& features,
                     const graph::DailyGraph<T>& g) {
  ad::Tensor<T> h = features;
  for (const auto& layer : params.layers) h = gat_layer(layer, h, g, params.cfg.negative_slope).h;
  return ad::add_rowvec(ad::matmul(h, params.wo), params.bo);
}

template <class T>
ad::Tensor<T> predict(const GatParams<T>& params, const ad::Tensor<T>& features,
                      const graph::DailyGraph<T>& g) {
  return ad::row_softmax(logits(params, features, g));
}

#define RELPROBE_INSTANTIATE_GAT(T)                                                            \
  template struct GatParams<T>;                                                                \
  template LayerOutput<T> gat_layer(const GatLayerParams<T>&, const ad::Tensor<T>&,            \
                                    const graph::DailyGraph<T>&, double);                      \
  template ad::Tensor<T> logits(const GatParams<T>&, const ad::Tensor<T>&,                     \
                                const graph::DailyGraph<T>&);                                  \
  template ad::Tensor<T> predict(const GatParams<T>&, const ad::Tensor<T>&,                    \
                                 const graph::DailyGraph<T>&);

RELPROBE_INSTANTIATE_GAT(float)
RELPROBE_INSTANTIATE_GAT(double)

}  // namespace relprobe::gat
