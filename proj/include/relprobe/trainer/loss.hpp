#pragma once

#include <array>
#include <span>

#include "relprobe/autodiff/tensor.hpp"

namespace relprobe::train {

using ClassWeights = std::array<double, 3>;  // negative, neutral, positive
inline constexpr ClassWeights kDefaultClassWeights{5.0, 1.0, 5.0};
inline constexpr double kLogFloor = 1e-12;

// -sum_u w[y_u] * log(max(p[u][y_u], 1e-12)) over rows with a label >= 0.
// Returns a constant zero when no row is labeled.
template <class T>
ad::Tensor<T> weighted_ce(const ad::Tensor<T>& probs, std::span<const int> labels,
                          const ClassWeights& weights);

// Same objective with every weight 1, written with masked_select.
template <class T>
ad::Tensor<T> cross_entropy(const ad::Tensor<T>& probs, std::span<const int> labels);

}  // namespace relprobe::train
