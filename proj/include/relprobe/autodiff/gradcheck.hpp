#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relprobe/autodiff/tensor.hpp"

namespace relprobe::ad {

template <class T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <class T>
struct GradcheckReport {
  struct ParamError {
    std::string name;
    double max_rel_error = 0;
  };
  bool pass = true;
  double tol = 0;
  std::vector<ParamError> params;
  // Ops whose local VJP disagrees with central differences (only computed on failure).
  std::vector<std::string> failing_ops;
  std::optional<std::string> non_finite_op;

  std::string summary() const;
};

// Compares tape gradients of the scalar f() with respect to each input leaf
// against central differences. Error per entry is |a - n| / max(1, |a|, |n|).
// f must rebuild its graph from the (perturbed) leaves on every call.
template <class T>
GradcheckReport<T> gradcheck(const std::function<Tensor<T>()>& f,
                             const std::vector<NamedTensor<T>>& inputs, T step, T tol);

extern template struct GradcheckReport<float>;
extern template struct GradcheckReport<double>;

}  // namespace relprobe::ad
