#pragma once

#include <array>

#include "relight/nn/tensor.hpp"

namespace relight::nn {

/// Per-axis (depth, height, width) geometry. 2D convolutions use depth
/// kernel 1, stride 1, padding 0.
struct ConvGeom {
  std::array<int, 3> kernel{1, 1, 1};
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> pad{0, 0, 0};

  static ConvGeom k2d(int k, int s, int p) { return {{1, k, k}, {1, s, s}, {0, p, p}}; }
  static ConvGeom k3d(std::array<int, 3> k, std::array<int, 3> s, std::array<int, 3> p) {
    return {k, s, p};
  }
  /// floor((in + 2p - k) / s) + 1 per axis.
  int out_size(int axis, int in) const;
};

/// Cross-correlation. x: (N,C,H,W) with w: (O,C,kh,kw), or x: (N,C,D,H,W)
/// with w: (O,C,kd,kh,kw). bias: (O).
template <typename T>
Tensor<T> conv_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                       const ConvGeom& g);

/// Straight nested-loop reference used as a test oracle (no graph).
template <typename T>
Tensor<T> conv_reference(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                         const ConvGeom& g);

}  // namespace relight::nn
