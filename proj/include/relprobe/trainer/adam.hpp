#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "relprobe/autodiff/checkpoint.hpp"
#include "relprobe/autodiff/gradcheck.hpp"

namespace relprobe::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string& param)
      : std::runtime_error("non-finite gradient in '" + param + "'; step aborted"), param_(param) {}
  const std::string& param() const { return param_; }

 private:
  std::string param_;
};

template <class T>
class Adam {
 public:
  Adam(std::vector<ad::NamedTensor<T>> params, AdamConfig cfg = {});

  // Checks every gradient before touching any parameter.
  void step(double lr);
  void zero_grad();

  std::size_t steps() const { return t_; }
  const std::vector<ad::NamedTensor<T>>& params() const { return params_; }

  // Moments as "adam.m.<name>" / "adam.v.<name>" plus "adam.t".
  std::vector<ad::NamedArray> state() const;
  void load_state(const std::vector<ad::NamedArray>& entries);

 private:
  std::vector<ad::NamedTensor<T>> params_;
  AdamConfig cfg_;
  std::vector<std::vector<T>> m_, v_;
  std::size_t t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace relprobe::train
