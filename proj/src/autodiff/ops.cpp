#include "relprobe/autodiff/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace relprobe::ad {

namespace {

template <class T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using CMap = Eigen::Map<const MatR<T>>;
template <class T>
using MMap = Eigen::Map<MatR<T>>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                              shape_str(b));
}

template <class T>
void require_matrix(const char* op, const Tensor<T>& a) {
  if (a.rank() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a matrix, got shape " +
                                shape_str(a.shape()));
  }
}

template <class T>
CMap<T> as_mat(const ArgView<T>& v) {
  return CMap<T>(v.value.data(), v.rows(), v.cols());
}

template <class T, class F, class D>
Tensor<T> unary(const char* name, const Tensor<T>& a, F f, D dydx) {
  // dydx(x, y) is the elementwise derivative.
  return apply_op<T>(
      name, {a}, a.shape(),
      [f](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[0].value[i]);
      },
      [dydx](std::span<const ArgView<T>> in, std::span<const T> out, std::span<const T> g,
             std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * dydx(in[0].value[i], out[i]);
      });
}

}  // namespace

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  if (a.cols() != b.rows()) shape_error("matmul", a.shape(), b.shape());
  const std::size_t m = a.rows(), n = b.cols();
  return apply_op<T>(
      "matmul", {a, b}, {m, n},
      [m, n](std::span<const ArgView<T>> in, std::span<T> out) {
        MMap<T>(out.data(), m, n).noalias() = as_mat(in[0]) * as_mat(in[1]);
      },
      [m, n](std::span<const ArgView<T>> in, std::span<const T>, std::span<const T> g,
             std::span<const std::span<T>> gin) {
        CMap<T> gm(g.data(), m, n);
        if (!gin[0].empty()) {
          MMap<T>(gin[0].data(), in[0].rows(), in[0].cols()).noalias() +=
              gm * as_mat(in[1]).transpose();
        }
        if (!gin[1].empty()) {
          MMap<T>(gin[1].data(), in[1].rows(), in[1].cols()).noalias() +=
              as_mat(in[0]).transpose() * gm;
        }
      });
}

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
  require_matrix("transpose", a);
  const std::size_t r = a.rows(), c = a.cols();
  return apply_op<T>(
      "transpose", {a}, {c, r},
      [r, c](std::span<const ArgView<T>> in, std::span<T> out) {
        MMap<T>(out.data(), c, r) = as_mat(in[0]).transpose();
      },
      [r, c](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
             std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        MMap<T>(gin[0].data(), r, c) += CMap<T>(g.data(), c, r).transpose();
      });
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape());
  return apply_op<T>(
      "add", {a, b}, a.shape(),
      [](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[0].value[i] + in[1].value[i];
      },
      [](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
         std::span<const std::span<T>> gin) {
        for (int k = 0; k < 2; ++k) {
          if (gin[k].empty()) continue;
          for (std::size_t i = 0; i < g.size(); ++i) gin[k][i] += g[i];
        }
      });
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_error("sub", a.shape(), b.shape());
  return apply_op<T>(
      "sub", {a, b}, a.shape(),
      [](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[0].value[i] - in[1].value[i];
      },
      [](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
         std::span<const std::span<T>> gin) {
        if (!gin[0].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
        if (!gin[1].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[1][i] -= g[i];
      });
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  return apply_op<T>(
      "mul", {a, b}, a.shape(),
      [](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[0].value[i] * in[1].value[i];
      },
      [](std::span<const ArgView<T>> in, std::span<const T>, std::span<const T> g,
         std::span<const std::span<T>> gin) {
        if (!gin[0].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * in[1].value[i];
        if (!gin[1].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[1][i] += g[i] * in[0].value[i];
      });
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  return unary<T>(
      "scale", a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; });
}

template <class T>
Tensor<T> add_scalar(const Tensor<T>& a, T shift) {
  return unary<T>(
      "add_scalar", a, [shift](T x) { return x + shift; }, [](T, T) { return T(1); });
}

template <class T>
Tensor<T> add_rowvec(const Tensor<T>& a, const Tensor<T>& v) {
  if (v.numel() != a.cols()) shape_error("add_rowvec", a.shape(), v.shape());
  const std::size_t c = a.cols();
  return apply_op<T>(
      "add_rowvec", {a, v}, a.shape(),
      [c](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[0].value[i] + in[1].value[i % c];
      },
      [c](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
          std::span<const std::span<T>> gin) {
        if (!gin[0].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
        if (!gin[1].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[1][i % c] += g[i];
      });
}

template <class T>
Tensor<T> mul_rowvec(const Tensor<T>& a, const Tensor<T>& v) {
  if (v.numel() != a.cols()) shape_error("mul_rowvec", a.shape(), v.shape());
  const std::size_t c = a.cols();
  return apply_op<T>(
      "mul_rowvec", {a, v}, a.shape(),
      [c](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[0].value[i] * in[1].value[i % c];
      },
      [c](std::span<const ArgView<T>> in, std::span<const T>, std::span<const T> g,
          std::span<const std::span<T>> gin) {
        if (!gin[0].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * in[1].value[i % c];
        if (!gin[1].empty())
          for (std::size_t i = 0; i < g.size(); ++i) gin[1][i % c] += g[i] * in[0].value[i];
      });
}

namespace {

template <class T>
void softmax_rows_into(std::span<const T> x, const std::uint8_t* mask, std::size_t r,
                       std::size_t c, std::span<T> out) {
  for (std::size_t i = 0; i < r; ++i) {
    const T* row = x.data() + i * c;
    T* o = out.data() + i * c;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < c; ++j) {
      if (!mask || mask[i * c + j]) mx = std::max(mx, row[j]);
    }
    T z = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!mask || mask[i * c + j]) {
        o[j] = std::exp(row[j] - mx);
        z += o[j];
      } else {
        o[j] = 0;
      }
    }
    for (std::size_t j = 0; j < c; ++j) o[j] /= z;
  }
}

template <class T>
void softmax_rows_vjp(std::span<const T> y, std::span<const T> g, std::size_t r, std::size_t c,
                      std::span<T> gin) {
  for (std::size_t i = 0; i < r; ++i) {
    T dot = 0;
    for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
    for (std::size_t j = 0; j < c; ++j) gin[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
  }
}

}  // namespace

template <class T>
Tensor<T> row_softmax(const Tensor<T>& a) {
  const std::size_t r = a.rows(), c = a.cols();
  return apply_op<T>(
      "row_softmax", {a}, a.shape(),
      [r, c](std::span<const ArgView<T>> in, std::span<T> out) {
        softmax_rows_into<T>(in[0].value, nullptr, r, c, out);
      },
      [r, c](std::span<const ArgView<T>>, std::span<const T> y, std::span<const T> g,
             std::span<const std::span<T>> gin) {
        if (!gin[0].empty()) softmax_rows_vjp<T>(y, g, r, c, gin[0]);
      });
}

template <class T>
Tensor<T> masked_row_softmax(const Tensor<T>& a, const Mask& mask) {
  const std::size_t r = a.rows(), c = a.cols();
  if (mask.size() != a.numel()) {
    shape_error("masked_row_softmax", a.shape(), Shape{mask.size()});
  }
  for (std::size_t i = 0; i < r; ++i) {
    if (std::none_of(mask.begin() + i * c, mask.begin() + (i + 1) * c, [](auto m) { return m; })) {
      throw std::invalid_argument("masked_row_softmax: row " + std::to_string(i) +
                                  " has no unmasked entry");
    }
  }
  return apply_op<T>(
      "masked_row_softmax", {a}, a.shape(),
      [r, c, mask](std::span<const ArgView<T>> in, std::span<T> out) {
        softmax_rows_into<T>(in[0].value, mask.data(), r, c, out);
      },
      [r, c](std::span<const ArgView<T>>, std::span<const T> y, std::span<const T> g,
             std::span<const std::span<T>> gin) {
        if (!gin[0].empty()) softmax_rows_vjp<T>(y, g, r, c, gin[0]);
      });
}

template <class T>
Tensor<T> layer_norm_rows(const Tensor<T>& a, T eps) {
  const std::size_t r = a.rows(), c = a.cols();
  return apply_op<T>(
      "layer_norm", {a}, a.shape(),
      [r, c, eps](std::span<const ArgView<T>> in, std::span<T> out) {
        const auto& x = in[0].value;
        for (std::size_t i = 0; i < r; ++i) {
          T mu = 0;
          for (std::size_t j = 0; j < c; ++j) mu += x[i * c + j];
          mu /= T(c);
          T var = 0;
          for (std::size_t j = 0; j < c; ++j) {
            const T d = x[i * c + j] - mu;
            var += d * d;
          }
          var /= T(c);
          const T inv = T(1) / std::sqrt(var + eps);
          for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (x[i * c + j] - mu) * inv;
        }
      },
      [r, c, eps](std::span<const ArgView<T>> in, std::span<const T> y, std::span<const T> g,
                  std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        const auto& x = in[0].value;
        for (std::size_t i = 0; i < r; ++i) {
          T mu = 0;
          for (std::size_t j = 0; j < c; ++j) mu += x[i * c + j];
          mu /= T(c);
          T var = 0;
          for (std::size_t j = 0; j < c; ++j) {
            const T d = x[i * c + j] - mu;
            var += d * d;
          }
          var /= T(c);
          const T inv = T(1) / std::sqrt(var + eps);
          T gmean = 0, gy = 0;
          for (std::size_t j = 0; j < c; ++j) {
            gmean += g[i * c + j];
            gy += g[i * c + j] * y[i * c + j];
          }
          gmean /= T(c);
          gy /= T(c);
          for (std::size_t j = 0; j < c; ++j) {
            gin[0][i * c + j] += inv * (g[i * c + j] - gmean - y[i * c + j] * gy);
          }
        }
      });
}

template <class T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope) {
  return unary<T>(
      "leaky_relu", a, [slope](T x) { return x > 0 ? x : slope * x; },
      [slope](T x, T) { return x > 0 ? T(1) : slope; });
}

template <class T>
Tensor<T> elu(const Tensor<T>& a, T alpha) {
  return unary<T>(
      "elu", a, [alpha](T x) { return x > 0 ? x : alpha * std::expm1(x); },
      [alpha](T x, T y) { return x > 0 ? T(1) : y + alpha; });
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return unary<T>(
      "sigmoid", a,
      [](T x) {
        if (x >= 0) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Tensor<T> tanh(const Tensor<T>& a) {
  return unary<T>(
      "tanh", a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Tensor<T> log(const Tensor<T>& a) {
  return unary<T>(
      "log", a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <class T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary<T>(
      "exp", a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <class T>
Tensor<T> clamp_min(const Tensor<T>& a, T lo) {
  return unary<T>(
      "clamp_min", a, [lo](T x) { return x < lo ? lo : x; },
      [lo](T x, T) { return x < lo ? T(0) : T(1); });
}

template <class T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b, int axis) {
  require_matrix("concat", a);
  require_matrix("concat", b);
  if (axis == 0) {
    if (a.cols() != b.cols()) shape_error("concat", a.shape(), b.shape());
    const std::size_t na = a.numel();
    return apply_op<T>(
        "concat", {a, b}, {a.rows() + b.rows(), a.cols()},
        [na](std::span<const ArgView<T>> in, std::span<T> out) {
          std::copy(in[0].value.begin(), in[0].value.end(), out.begin());
          std::copy(in[1].value.begin(), in[1].value.end(), out.begin() + na);
        },
        [na](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
             std::span<const std::span<T>> gin) {
          if (!gin[0].empty())
            for (std::size_t i = 0; i < na; ++i) gin[0][i] += g[i];
          if (!gin[1].empty())
            for (std::size_t i = 0; i < gin[1].size(); ++i) gin[1][i] += g[na + i];
        });
  }
  if (axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  if (a.rows() != b.rows()) shape_error("concat", a.shape(), b.shape());
  const std::size_t r = a.rows(), ca = a.cols(), cb = b.cols();
  return apply_op<T>(
      "concat", {a, b}, {r, ca + cb},
      [r, ca, cb](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < ca; ++j) out[i * (ca + cb) + j] = in[0].value[i * ca + j];
          for (std::size_t j = 0; j < cb; ++j) out[i * (ca + cb) + ca + j] = in[1].value[i * cb + j];
        }
      },
      [r, ca, cb](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
                  std::span<const std::span<T>> gin) {
        for (std::size_t i = 0; i < r; ++i) {
          if (!gin[0].empty())
            for (std::size_t j = 0; j < ca; ++j) gin[0][i * ca + j] += g[i * (ca + cb) + j];
          if (!gin[1].empty())
            for (std::size_t j = 0; j < cb; ++j) gin[1][i * cb + j] += g[i * (ca + cb) + ca + j];
        }
      });
}

template <class T>
Tensor<T> sum(const Tensor<T>& a) {
  return apply_op<T>(
      "sum", {a}, {1},
      [](std::span<const ArgView<T>> in, std::span<T> out) {
        T s = 0;
        for (T x : in[0].value) s += x;
        out[0] = s;
      },
      [](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
         std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        for (auto& x : gin[0]) x += g[0];
      });
}

template <class T>
Tensor<T> mean(const Tensor<T>& a) {
  const T n = T(a.numel());
  return apply_op<T>(
      "mean", {a}, {1},
      [n](std::span<const ArgView<T>> in, std::span<T> out) {
        T s = 0;
        for (T x : in[0].value) s += x;
        out[0] = s / n;
      },
      [n](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
          std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        for (auto& x : gin[0]) x += g[0] / n;
      });
}

template <class T>
Tensor<T> mean_rows(const Tensor<T>& a) {
  const std::size_t r = a.rows(), c = a.cols();
  return apply_op<T>(
      "mean_rows", {a}, {1, c},
      [r, c](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) out[j] += in[0].value[i * c + j];
        for (auto& x : out) x /= T(r);
      },
      [r, c](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
             std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) gin[0][i * c + j] += g[j] / T(r);
      });
}

template <class T>
Tensor<T> masked_select(const Tensor<T>& a, const Mask& mask) {
  if (mask.size() != a.numel()) shape_error("masked_select", a.shape(), Shape{mask.size()});
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(i);
  if (idx.empty()) throw std::invalid_argument("masked_select: mask selects nothing");
  return apply_op<T>(
      "masked_select", {a}, {idx.size()},
      [idx](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t k = 0; k < idx.size(); ++k) out[k] = in[0].value[idx[k]];
      },
      [idx](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
            std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        for (std::size_t k = 0; k < idx.size(); ++k) gin[0][idx[k]] += g[k];
      });
}

template <class T>
Tensor<T> gather_rows(const Tensor<T>& a, std::span<const std::size_t> rows) {
  require_matrix("gather_rows", a);
  if (rows.empty()) throw std::invalid_argument("gather_rows: empty row list");
  const std::size_t c = a.cols();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  for (auto r : idx) {
    if (r >= a.rows()) {
      throw std::out_of_range("gather_rows: row " + std::to_string(r) + " outside " +
                              shape_str(a.shape()));
    }
  }
  return apply_op<T>(
      "gather_rows", {a}, {idx.size(), c},
      [idx, c](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t k = 0; k < idx.size(); ++k)
          std::copy_n(in[0].value.begin() + idx[k] * c, c, out.begin() + k * c);
      },
      [idx, c](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
               std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        for (std::size_t k = 0; k < idx.size(); ++k)
          for (std::size_t j = 0; j < c; ++j) gin[0][idx[k] * c + j] += g[k * c + j];
      });
}

template <class T>
Tensor<T> scatter_rows(const Tensor<T>& a, std::span<const std::size_t> rows, std::size_t n_rows) {
  require_matrix("scatter_rows", a);
  if (rows.size() != a.rows()) shape_error("scatter_rows", a.shape(), Shape{rows.size()});
  const std::size_t c = a.cols();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  for (auto r : idx) {
    if (r >= n_rows) throw std::out_of_range("scatter_rows: target row out of range");
  }
  return apply_op<T>(
      "scatter_rows", {a}, {n_rows, c},
      [idx, c](std::span<const ArgView<T>> in, std::span<T> out) {
        for (std::size_t k = 0; k < idx.size(); ++k)
          for (std::size_t j = 0; j < c; ++j) out[idx[k] * c + j] += in[0].value[k * c + j];
      },
      [idx, c](std::span<const ArgView<T>>, std::span<const T>, std::span<const T> g,
               std::span<const std::span<T>> gin) {
        if (gin[0].empty()) return;
        for (std::size_t k = 0; k < idx.size(); ++k)
          for (std::size_t j = 0; j < c; ++j) gin[0][k * c + j] += g[idx[k] * c + j];
      });
}

#define RELPROBE_INSTANTIATE_OPS(T)                                                        \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> transpose(const Tensor<T>&);                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> scale(const Tensor<T>&, T);                                           \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                      \
  template Tensor<T> add_rowvec(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> mul_rowvec(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> row_softmax(const Tensor<T>&);                                        \
  template Tensor<T> masked_row_softmax(const Tensor<T>&, const Mask&);                    \
  template Tensor<T> layer_norm_rows(const Tensor<T>&, T);                                 \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                                      \
  template Tensor<T> elu(const Tensor<T>&, T);                                             \
  template Tensor<T> sigmoid(const Tensor<T>&);                                            \
  template Tensor<T> tanh(const Tensor<T>&);                                               \
  template Tensor<T> log(const Tensor<T>&);                                                \
  template Tensor<T> exp(const Tensor<T>&);                                                \
  template Tensor<T> clamp_min(const Tensor<T>&, T);                                       \
  template Tensor<T> concat(const Tensor<T>&, const Tensor<T>&, int);                      \
  template Tensor<T> sum(const Tensor<T>&);                                                \
  template Tensor<T> mean(const Tensor<T>&);                                               \
  template Tensor<T> mean_rows(const Tensor<T>&);                                          \
  template Tensor<T> masked_select(const Tensor<T>&, const Mask&);                         \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const std::size_t>);          \
  template Tensor<T> scatter_rows(const Tensor<T>&, std::span<const std::size_t>, std::size_t);

RELPROBE_INSTANTIATE_OPS(float)
RELPROBE_INSTANTIATE_OPS(double)

}  // namespace relprobe::ad
