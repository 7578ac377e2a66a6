#include "relprobe/encoders/toy_encoder.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "relprobe/autodiff/init.hpp"
#include "relprobe/autodiff/ops.hpp"

namespace relprobe::enc {

template <class T>
ToyEncoder<T>::ToyEncoder(const ToyEncoderConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.vocab == 0 || cfg.max_len == 0 || cfg.dim == 0) {
    throw std::invalid_argument("toy encoder: vocab, max_len and dim must be positive");
  }
  std::mt19937_64 rng(seed);
  const std::size_t d = cfg.dim;
  token_emb_ = ad::randn_param<T>({cfg.vocab, d}, 1.0, rng);
  pos_emb_ = ad::randn_param<T>({cfg.max_len, d}, 0.5, rng);
  wq_ = ad::fan_in_param<T>({d, d}, rng);
  wk_ = ad::fan_in_param<T>({d, d}, rng);
  wv_ = ad::fan_in_param<T>({d, d}, rng);
  wo_ = ad::fan_in_param<T>({d, d}, rng);
  ln1_gain_ = ad::filled_param<T>({d}, T(1));
  ln1_bias_ = ad::filled_param<T>({d}, T(0));
  ff_w1_ = ad::fan_in_param<T>({d, 4 * d}, rng);
  ff_b1_ = ad::filled_param<T>({4 * d}, T(0));
  ff_w2_ = ad::fan_in_param<T>({4 * d, d}, rng);
  ff_b2_ = ad::filled_param<T>({d}, T(0));
  ln2_gain_ = ad::filled_param<T>({d}, T(1));
  ln2_bias_ = ad::filled_param<T>({d}, T(0));
}

template <class T>
HiddenStates<T> ToyEncoder<T>::encode(std::span<const int> tokens) const {
  using namespace ad;
  const std::size_t len = tokens.size();
  if (len == 0) throw std::invalid_argument("toy encoder: empty token sequence");
  if (len > cfg_.max_len) {
    throw std::invalid_argument("toy encoder: sequence length " + std::to_string(len) +
                                " exceeds max_len " + std::to_string(cfg_.max_len));
  }
  std::vector<std::size_t> ids(len), pos(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (tokens[i] < 0 || static_cast<std::size_t>(tokens[i]) >= cfg_.vocab) {
      throw std::out_of_range("toy encoder: token id " + std::to_string(tokens[i]) +
                              " at position " + std::to_string(i) + " outside vocab of " +
                              std::to_string(cfg_.vocab));
    }
    ids[i] = static_cast<std::size_t>(tokens[i]);
  }
  std::iota(pos.begin(), pos.end(), std::size_t{0});

  const T inv_sqrt_d = T(1) / std::sqrt(T(cfg_.dim));
  auto x0 = add(gather_rows(token_emb_, ids), gather_rows(pos_emb_, pos));
  auto q = matmul(x0, wq_);
  auto k = matmul(x0, wk_);
  auto v = matmul(x0, wv_);
  auto att = row_softmax(scale(matmul(q, transpose(k)), inv_sqrt_d));
  auto a = matmul(matmul(att, v), wo_);
  auto x1 = add_rowvec(mul_rowvec(layer_norm_rows(add(x0, a)), ln1_gain_), ln1_bias_);
  auto f = add_rowvec(matmul(elu(add_rowvec(matmul(x1, ff_w1_), ff_b1_)), ff_w2_), ff_b2_);
  auto x2 = add_rowvec(mul_rowvec(layer_norm_rows(add(x1, f)), ln2_gain_), ln2_bias_);
  return {x2, len, ContextMode::InputOnly};
}

template <class T>
void ToyEncoder<T>::collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const {
  out.push_back({prefix + "token_emb", token_emb_});
  out.push_back({prefix + "pos_emb", pos_emb_});
  out.push_back({prefix + "wq", wq_});
  out.push_back({prefix + "wk", wk_});
  out.push_back({prefix + "wv", wv_});
  out.push_back({prefix + "wo", wo_});
  out.push_back({prefix + "ln1_gain", ln1_gain_});
  out.push_back({prefix + "ln1_bias", ln1_bias_});
  out.push_back({prefix + "ff_w1", ff_w1_});
  out.push_back({prefix + "ff_b1", ff_b1_});
  out.push_back({prefix + "ff_w2", ff_w2_});
  out.push_back({prefix + "ff_b2", ff_b2_});
  out.push_back({prefix + "ln2_gain", ln2_gain_});
  out.push_back({prefix + "ln2_bias", ln2_bias_});
}

template class ToyEncoder<float>;
template class ToyEncoder<double>;

}  // namespace relprobe::enc
