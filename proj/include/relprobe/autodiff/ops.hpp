#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relprobe/autodiff/tensor.hpp"

// Differentiable primitives. Matrix ops take rank-2 operands; elementwise
// ops accept any rank. A rank-1 tensor of size n acts as a 1 x n row where a
// row vector is expected (bias, affine gain).
namespace relprobe::ad {

using Mask = std::vector<std::uint8_t>;

template <class T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> transpose(const Tensor<T>& a);

template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> scale(const Tensor<T>& a, T factor);
template <class T> Tensor<T> add_scalar(const Tensor<T>& a, T shift);

// a[r][c] + v[c] and a[r][c] * v[c].
template <class T> Tensor<T> add_rowvec(const Tensor<T>& a, const Tensor<T>& v);
template <class T> Tensor<T> mul_rowvec(const Tensor<T>& a, const Tensor<T>& v);

template <class T> Tensor<T> row_softmax(const Tensor<T>& a);
// Softmax over the entries of each row where mask is set; other entries are 0.
// Every row needs at least one set entry.
template <class T> Tensor<T> masked_row_softmax(const Tensor<T>& a, const Mask& mask);
// Per-row standardization, no affine: (x - mean) / sqrt(var + eps).
template <class T> Tensor<T> layer_norm_rows(const Tensor<T>& a, T eps = T(1e-5));

template <class T> Tensor<T> leaky_relu(const Tensor<T>& a, T negative_slope = T(0.2));
template <class T> Tensor<T> elu(const Tensor<T>& a, T alpha = T(1));
template <class T> Tensor<T> sigmoid(const Tensor<T>& a);
template <class T> Tensor<T> tanh(const Tensor<T>& a);
template <class T> Tensor<T> log(const Tensor<T>& a);
template <class T> Tensor<T> exp(const Tensor<T>& a);
template <class T> Tensor<T> clamp_min(const Tensor<T>& a, T lo);

// axis 0 stacks rows, axis 1 appends columns.
template <class T> Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b, int axis);

template <class T> Tensor<T> sum(const Tensor<T>& a);
template <class T> Tensor<T> mean(const Tensor<T>& a);
// Column means over the rows: (r x c) -> (1 x c).
template <class T> Tensor<T> mean_rows(const Tensor<T>& a);

// Flat vector of the entries where mask is set (row-major order).
template <class T> Tensor<T> masked_select(const Tensor<T>& a, const Mask& mask);

template <class T> Tensor<T> gather_rows(const Tensor<T>& a, std::span<const std::size_t> rows);
// (k x c) -> (n_rows x c) with row i of the input placed at rows[i], zeros elsewhere.
template <class T>
Tensor<T> scatter_rows(const Tensor<T>& a, std::span<const std::size_t> rows, std::size_t n_rows);

}  // namespace relprobe::ad
