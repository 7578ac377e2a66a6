#pragma once

#include <cstdint>
#include <vector>

#include "relprobe/autodiff/gradcheck.hpp"
#include "relprobe/graph/day_graph.hpp"

namespace relprobe::gat {

inline constexpr std::size_t kClasses = 3;

struct GatConfig {
  std::size_t in_dim = 128;
  std::size_t hidden = 128;
  std::size_t layers = 2;
  double negative_slope = 0.2;
};

template <class T>
struct GatLayerParams {
  ad::Tensor<T> w;  // d_in x d_out
  ad::Tensor<T> a;  // 2*d_out x 1; first half scores the receiver, second the neighbor
};

template <class T>
struct GatParams {
  GatConfig cfg;
  std::vector<GatLayerParams<T>> layers;
  ad::Tensor<T> wo;  // hidden x 3
  ad::Tensor<T> bo;  // 3

  static GatParams make(const GatConfig& cfg, std::uint64_t seed);
  void collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const;
};

template <class T>
struct LayerOutput {
  ad::Tensor<T> h;      // N x d_out after ELU
  ad::Tensor<T> alpha;  // N x N attention, zero off the neighborhood
};

// Neighborhood of u is {v : A[u][v]} plus a self-loop of edge weight 1.
// h'_u = elu(sum_v alpha_uv * W'_uv * (W h_v)).
template <class T>
LayerOutput<T> gat_layer(const GatLayerParams<T>& layer, const ad::Tensor<T>& h,
                         const graph::DailyGraph<T>& g, double negative_slope = 0.2);

// Class logits before the softmax: N x 3.
template <class T>
ad::Tensor<T> logits(const GatParams<T>& params, const ad::Tensor<T>& features,
                     const graph::DailyGraph<T>& g);

// Per-ticker (negative, neutral, positive) probabilities: N x 3.
template <class T>
ad::Tensor<T> predict(const GatParams<T>& params, const ad::Tensor<T>& features,
                      const graph::DailyGraph<T>& g);

}  // namespace relprobe::gat
