#pragma once

#include <vector>

#include "relight/nn/tensor.hpp"

namespace relight::nn {

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& x, T c);
template <typename T> Tensor<T> mul_scalar(const Tensor<T>& x, T c);

template <typename T> Tensor<T> relu(const Tensor<T>& x);
template <typename T> Tensor<T> leaky_relu(const Tensor<T>& x, T slope = T(0.2));
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);

template <typename T> Tensor<T> sum(const Tensor<T>& x);
template <typename T> Tensor<T> mean(const Tensor<T>& x);
/// mean((a - b)^2)
template <typename T> Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b);
/// mean((a - c)^2) for a constant c.
template <typename T> Tensor<T> mse_const(const Tensor<T>& a, T c);

/// Elementwise max; the gradient goes to `a` on ties.
template <typename T> Tensor<T> max_merge(const Tensor<T>& a, const Tensor<T>& b);

/// Concatenation along `dim` (all other dims equal).
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& xs, int dim = 1);

/// Same values, no graph edge.
template <typename T> Tensor<T> detach(const Tensor<T>& x);

template <typename T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);

/// Bilinear resize of NCHW with half-pixel centers and edge clamping.
template <typename T> Tensor<T> resize_bilinear(const Tensor<T>& x, int out_h, int out_w);
template <typename T> Tensor<T> bilinear_upsample(const Tensor<T>& x) {
  return resize_bilinear(x, x.dim(2) * 2, x.dim(3) * 2);
}

/// Maximum over one axis (removed from the shape); first index wins ties.
template <typename T> Tensor<T> max_over(const Tensor<T>& x, int dim);

/// 3D feature map (N,C,D,H,W) to a 2D skip (N,C,out_h,out_w): max over D,
/// then bilinear resize.
template <typename T> Tensor<T> linear_upsample(const Tensor<T>& x, int out_h, int out_w);

}  // namespace relight::nn
