#pragma once

#include <cmath>
#include <random>

#include "relprobe/autodiff/tensor.hpp"

namespace relprobe::ad {

template <class T>
Tensor<T> randn_param(Shape shape, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, stddev);
  std::vector<T> data(numel(shape));
  for (auto& x : data) x = static_cast<T>(nd(rng));
  return Tensor<T>::param(std::move(shape), std::move(data));
}

// Scaled by 1/sqrt(fan_in), fan_in being the leading dim.
template <class T>
Tensor<T> fan_in_param(Shape shape, std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(shape.front()));
  return randn_param<T>(std::move(shape), s, rng);
}

template <class T>
Tensor<T> filled_param(Shape shape, T value) {
  std::vector<T> data(numel(shape), value);
  return Tensor<T>::param(std::move(shape), std::move(data));
}

}  // namespace relprobe::ad
