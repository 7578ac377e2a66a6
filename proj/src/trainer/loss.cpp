#include "relprobe/trainer/loss.hpp"

#include <stdexcept>
#include <string>

#include "relprobe/autodiff/ops.hpp"

namespace relprobe::train {

namespace {

template <class T>
void check(const ad::Tensor<T>& probs, std::span<const int> labels) {
  if (probs.rank() != 2 || probs.cols() != 3 || probs.rows() != labels.size()) {
    throw std::invalid_argument("cross-entropy: probabilities " + ad::shape_str(probs.shape()) +
                                " vs " + std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < -1 || y > 2) throw std::invalid_argument("cross-entropy: label out of range");
  }
}

}  // namespace

template <class T>
ad::Tensor<T> weighted_ce(const ad::Tensor<T>& probs, std::span<const int> labels,
                          const ClassWeights& weights) {
  check(probs, labels);
  std::vector<T> w(probs.numel(), T(0));
  bool any = false;
  for (std::size_t u = 0; u < labels.size(); ++u) {
    if (labels[u] < 0) continue;
    w[u * 3 + std::size_t(labels[u])] = T(weights[std::size_t(labels[u])]);
    any = true;
  }
  if (!any) return ad::Tensor<T>::scalar(T(0));
  auto logp = ad::log(ad::clamp_min(probs, T(kLogFloor)));
  auto picked = ad::mul(logp, ad::Tensor<T>::constant(probs.shape(), std::move(w)));
  return ad::scale(ad::sum(picked), T(-1));
}

template <class T>
ad::Tensor<T> cross_entropy(const ad::Tensor<T>& probs, std::span<const int> labels) {
  check(probs, labels);
  ad::Mask mask(probs.numel(), 0);
  bool any = false;
  for (std::size_t u = 0; u < labels.size(); ++u) {
    if (labels[u] < 0) continue;
    mask[u * 3 + std::size_t(labels[u])] = 1;
    any = true;
  }
  if (!any) return ad::Tensor<T>::scalar(T(0));
  auto logp = ad::log(ad::clamp_min(probs, T(kLogFloor)));
  return ad::scale(ad::sum(ad::masked_select(logp, mask)), T(-1));
}

template ad::Tensor<float> weighted_ce(const ad::Tensor<float>&, std::span<const int>,
                                       const ClassWeights&);
template ad::Tensor<double> weighted_ce(const ad::Tensor<double>&, std::span<const int>,
                                        const ClassWeights&);
template ad::Tensor<float> cross_entropy(const ad::Tensor<float>&, std::span<const int>);
template ad::Tensor<double> cross_entropy(const ad::Tensor<double>&, std::span<const int>);

}  // namespace relprobe::train
