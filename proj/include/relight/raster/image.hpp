#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "relight/errors.hpp"

namespace relight {

/// Interleaved (row-major, top-left origin, y down) multi-channel raster.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{});
  Raster(int width, int height, int channels, std::vector<T> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool same_size(int w, int h) const { return w == width_ && h == height_; }
  template <typename U>
  bool same_size(const Raster<U>& o) const {
    return o.width() == width_ && o.height() == height_;
  }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

extern template class Raster<float>;
extern template class Raster<double>;

std::string shape_string(int width, int height, int channels);

/// Linear-radiance RGB image; every channel finite and non-negative.
class ColorImage {
 public:
  explicit ColorImage(Raster<float> rgb);
  ColorImage(int width, int height, std::vector<float> rgb);

  int width() const { return rgb_.width(); }
  int height() const { return rgb_.height(); }
  float at(int x, int y, int c) const { return rgb_.at(x, y, c); }
  const Raster<float>& raster() const { return rgb_; }

  bool operator==(const ColorImage&) const = default;

 private:
  Raster<float> rgb_;
};

/// Camera-space depth along the optical axis, arbitrary global scale.
/// Stored in double so that a global rescale is represented without
/// re-rounding to single precision; consumers are scale invariant.
class DepthMap {
 public:
  explicit DepthMap(Raster<double> depth);
  DepthMap(int width, int height, std::vector<double> depth);

  int width() const { return depth_.width(); }
  int height() const { return depth_.height(); }
  double at(int x, int y) const { return depth_.at(x, y); }
  const Raster<double>& raster() const { return depth_; }

  /// Every value multiplied by s (s > 0).
  DepthMap scaled(double s) const;

  bool operator==(const DepthMap&) const = default;

 private:
  Raster<double> depth_;
};

/// Visibility times clamped cosine, values in [0,1].
class ShadowImage {
 public:
  explicit ShadowImage(Raster<float> shadow);
  ShadowImage(int width, int height, std::vector<float> shadow);

  int width() const { return shadow_.width(); }
  int height() const { return shadow_.height(); }
  float at(int x, int y) const { return shadow_.at(x, y); }
  const Raster<float>& raster() const { return shadow_; }

  bool operator==(const ShadowImage&) const = default;

 private:
  Raster<float> shadow_;
};

}  // namespace relight
