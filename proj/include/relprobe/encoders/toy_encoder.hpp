#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relprobe/autodiff/gradcheck.hpp"
#include "relprobe/encoders/article.hpp"

namespace relprobe::enc {

struct ToyEncoderConfig {
  std::size_t vocab = 200;
  std::size_t max_len = 64;
  std::size_t dim = 64;
};

// Stand-in language-model backbone: token + position embeddings followed by
// one post-norm self-attention block with an ELU feed-forward (width 4d).
template <class T>
class ToyEncoder {
 public:
  ToyEncoder(const ToyEncoderConfig& cfg, std::uint64_t seed);

  // L x d states; throws on out-of-vocab ids (naming the position) or L > max_len.
  HiddenStates<T> encode(std::span<const int> tokens) const;
  HiddenStates<T> encode(const Article& article) const { return encode(article.tokens); }

  void collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const;
  const ToyEncoderConfig& config() const { return cfg_; }

 private:
  ToyEncoderConfig cfg_;
  ad::Tensor<T> token_emb_, pos_emb_;
  ad::Tensor<T> wq_, wk_, wv_, wo_;
  ad::Tensor<T> ln1_gain_, ln1_bias_;
  ad::Tensor<T> ff_w1_, ff_b1_, ff_w2_, ff_b2_;
  ad::Tensor<T> ln2_gain_, ln2_bias_;
};

extern template class ToyEncoder<float>;
extern template class ToyEncoder<double>;

}  // namespace relprobe::enc
