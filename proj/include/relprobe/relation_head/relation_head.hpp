#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relprobe/autodiff/gradcheck.hpp"

namespace relprobe::head {

enum class HeadVariant { Full, Limited, Pooling };

const char* to_string(HeadVariant v);
HeadVariant variant_from_string(const std::string& s);  // "full" | "limited" | "pooling"

struct RelationHeadConfig {
  std::size_t tickers = 20;
  std::size_t dim = 64;        // token state width d
  std::size_t proj_dim = 128;  // reduced width d_p
};

template <class T>
struct RelationHeadParams {
  ad::Tensor<T> ticker_emb;  // N x d
  ad::Tensor<T> wq, wk, wv;  // d x d
  ad::Tensor<T> wproj;       // d x d_p
  ad::Tensor<T> z_gain, z_bias;  // d_p
  ad::Tensor<T> wbi;             // d_p x d_p
  ad::Tensor<T> i_gain, i_bias;  // N
  ad::Tensor<T> pool_a, pool_b;  // d x d_p, pooling variant only
};

template <class T>
struct HeadOutput {
  ad::Tensor<T> interaction;  // normalized N x N
  ad::Tensor<T> raw;          // pre-normalization bilinear scores
  ad::Tensor<T> attention;    // queries x L'; undefined for pooling
  ad::Tensor<T> conditioned;  // news-conditioned ticker embeddings, N x d
};

// Maps one article's token states (L' x d) to an N x N interaction matrix.
template <class T>
class RelationHead {
 public:
  RelationHead(const RelationHeadConfig& cfg, std::uint64_t seed);

  HeadOutput<T> full(const ad::Tensor<T>& states) const;
  // Queries restricted to the mentioned tickers; other rows of the
  // conditioned embeddings are zero. nullopt when nothing is mentioned.
  std::optional<HeadOutput<T>> limited(const ad::Tensor<T>& states,
                                       std::span<const std::size_t> mentioned) const;
  HeadOutput<T> pooling(const ad::Tensor<T>& states) const;

  std::optional<HeadOutput<T>> apply(HeadVariant variant, const ad::Tensor<T>& states,
                                     std::span<const std::size_t> mentioned) const;

  RelationHeadParams<T>& params() { return p_; }
  const RelationHeadParams<T>& params() const { return p_; }
  const RelationHeadConfig& config() const { return cfg_; }
  // Only the weights the variant actually uses.
  void collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix,
               HeadVariant variant) const;

 private:
  void check_states(const ad::Tensor<T>& states) const;
  HeadOutput<T> finish(ad::Tensor<T> conditioned, ad::Tensor<T> attention) const;

  RelationHeadConfig cfg_;
  RelationHeadParams<T> p_;
};

extern template class RelationHead<float>;
extern template class RelationHead<double>;

}  // namespace relprobe::head
