#include "relprobe/relation_head/relation_head.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "relprobe/autodiff/init.hpp"
#include "relprobe/autodiff/ops.hpp"
#include "relprobe/util/log.hpp"

namespace relprobe::head {

const char* to_string(HeadVariant v) {
  switch (v) {
    case HeadVariant::Full: return "full";
    case HeadVariant::Limited: return "limited";
    case HeadVariant::Pooling: return "pooling";
  }
  return "?";
}

HeadVariant variant_from_string(const std::string& s) {
  if (s == "full") return HeadVariant::Full;
  if (s == "limited") return HeadVariant::Limited;
  if (s == "pooling") return HeadVariant::Pooling;
  throw std::invalid_argument("unknown head variant '" + s + "'");
}

template <class T>
RelationHead<T>::RelationHead(const RelationHeadConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.tickers == 0 || cfg.dim == 0 || cfg.proj_dim == 0) {
    throw std::invalid_argument("relation head: tickers, dim and proj_dim must be positive");
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = cfg.tickers, d = cfg.dim, dp = cfg.proj_dim;
  p_.ticker_emb = ad::randn_param<T>({n, d}, 1.0, rng);
  p_.wq = ad::fan_in_param<T>({d, d}, rng);
  p_.wk = ad::fan_in_param<T>({d, d}, rng);
  p_.wv = ad::fan_in_param<T>({d, d}, rng);
  p_.wproj = ad::fan_in_param<T>({d, dp}, rng);
  p_.z_gain = ad::filled_param<T>({dp}, T(1));
  p_.z_bias = ad::filled_param<T>({dp}, T(0));
  p_.wbi = ad::fan_in_param<T>({dp, dp}, rng);
  p_.i_gain = ad::filled_param<T>({n}, T(1));
  p_.i_bias = ad::filled_param<T>({n}, T(0));
  p_.pool_a = ad::fan_in_param<T>({d, dp}, rng);
  p_.pool_b = ad::fan_in_param<T>({d, dp}, rng);
}

template <class T>
void RelationHead<T>::check_states(const ad::Tensor<T>& states) const {
  if (states.rank() != 2 || states.cols() != p_.ticker_emb.cols()) {
    throw std::invalid_argument("relation head: token states " + ad::shape_str(states.shape()) +
                                " do not match ticker embeddings " +
                                ad::shape_str(p_.ticker_emb.shape()));
  }
}

template <class T>
HeadOutput<T> RelationHead<T>::finish(ad::Tensor<T> conditioned, ad::Tensor<T> attention) const {
  using namespace ad;
  auto z = add_rowvec(mul_rowvec(layer_norm_rows(matmul(conditioned, p_.wproj)), p_.z_gain),
                      p_.z_bias);
  auto raw = matmul(matmul(z, p_.wbi), transpose(z));
  auto interaction = add_rowvec(mul_rowvec(layer_norm_rows(raw), p_.i_gain), p_.i_bias);
  return {interaction, raw, attention, conditioned};
}

template <class T>
HeadOutput<T> RelationHead<T>::full(const ad::Tensor<T>& states) const {
  using namespace ad;
  check_states(states);
  const T inv_sqrt_d = T(1) / std::sqrt(T(cfg_.dim));
  auto q = matmul(p_.ticker_emb, p_.wq);
  auto k = matmul(states, p_.wk);
  auto v = matmul(states, p_.wv);
  auto att = row_softmax(scale(matmul(q, transpose(k)), inv_sqrt_d));
  return finish(matmul(att, v), att);
}

template <class T>
std::optional<HeadOutput<T>> RelationHead<T>::limited(const ad::Tensor<T>& states,
                                                      std::span<const std::size_t> mentioned) const {
  using namespace ad;
  check_states(states);
  std::vector<std::size_t> idx(mentioned.begin(), mentioned.end());
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (idx.empty()) {
    util::logger()->info("limited head: article mentions no tickers, skipped");
    return std::nullopt;
  }
  if (idx.back() >= cfg_.tickers) {
    throw std::out_of_range("limited head: ticker index " + std::to_string(idx.back()) +
                            " outside universe of " + std::to_string(cfg_.tickers));
  }
  const T inv_sqrt_d = T(1) / std::sqrt(T(cfg_.dim));
  auto q = matmul(gather_rows(p_.ticker_emb, idx), p_.wq);
  auto k = matmul(states, p_.wk);
  auto v = matmul(states, p_.wv);
  auto att = row_softmax(scale(matmul(q, transpose(k)), inv_sqrt_d));
  auto conditioned = scatter_rows(matmul(att, v), idx, cfg_.tickers);
  return finish(conditioned, att);
}

template <class T>
HeadOutput<T> RelationHead<T>::pooling(const ad::Tensor<T>& states) const {
  using namespace ad;
  check_states(states);
  auto lifted = add_rowvec(p_.ticker_emb, mean_rows(states));
  auto left = matmul(lifted, p_.pool_a);
  auto right = matmul(lifted, p_.pool_b);
  auto raw = matmul(left, transpose(right));
  auto interaction = add_rowvec(mul_rowvec(layer_norm_rows(raw), p_.i_gain), p_.i_bias);
  return {interaction, raw, Tensor<T>{}, lifted};
}

template <class T>
std::optional<HeadOutput<T>> RelationHead<T>::apply(HeadVariant variant,
                                                    const ad::Tensor<T>& states,
                                                    std::span<const std::size_t> mentioned) const {
  switch (variant) {
    case HeadVariant::Full: return full(states);
    case HeadVariant::Limited: return limited(states, mentioned);
    case HeadVariant::Pooling: return pooling(states);
  }
  return std::nullopt;
}

template <class T>
void RelationHead<T>::collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix,
                              HeadVariant variant) const {
  out.push_back({prefix + "ticker_emb", p_.ticker_emb});
  if (variant == HeadVariant::Pooling) {
    out.push_back({prefix + "pool_a", p_.pool_a});
    out.push_back({prefix + "pool_b", p_.pool_b});
  } else {
    out.push_back({prefix + "wq", p_.wq});
    out.push_back({prefix + "wk", p_.wk});
    out.push_back({prefix + "wv", p_.wv});
    out.push_back({prefix + "wproj", p_.wproj});
    out.push_back({prefix + "z_gain", p_.z_gain});
    out.push_back({prefix + "z_bias", p_.z_bias});
    out.push_back({prefix + "wbi", p_.wbi});
  }
  out.push_back({prefix + "i_gain", p_.i_gain});
  out.push_back({prefix + "i_bias", p_.i_bias});
}

template class RelationHead<float>;
template class RelationHead<double>;

}  // namespace relprobe::head
