#include "relight/raster/image.hpp"

#include <cmath>
#include <sstream>

namespace relight {

template <typename T>
Raster<T>::Raster(int width, int height, int channels, T fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw ValidationError("raster dimensions must be positive, got " +
                          shape_string(width, height, channels));
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

template <typename T>
Raster<T>::Raster(int width, int height, int channels, std::vector<T> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw ValidationError("raster dimensions must be positive, got " +
                          shape_string(width, height, channels));
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ValidationError("raster buffer holds " + std::to_string(data_.size()) +
                          " values, expected " + shape_string(width, height, channels));
  }
}

template class Raster<float>;
template class Raster<double>;

std::string shape_string(int width, int height, int channels) {
  std::ostringstream os;
  os << width << "x" << height << "x" << channels;
  return os.str();
}

namespace {

template <typename T, typename Pred>
void check_values(const Raster<T>& r, const char* what, Pred ok, const char* rule) {
  const auto data = r.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i]) || !ok(data[i])) {
      std::ostringstream os;
      os << what << ": value " << data[i] << " at index " << i << " violates " << rule;
      throw ValidationError(os.str());
    }
  }
}

}  // namespace

ColorImage::ColorImage(Raster<float> rgb) : rgb_(std::move(rgb)) {
  if (rgb_.channels() != 3) {
    throw ValidationError("color image needs 3 channels, got " + std::to_string(rgb_.channels()));
  }
  check_values(rgb_, "color image", [](float v) { return v >= 0.0f; }, "finite, >= 0");
}

ColorImage::ColorImage(int width, int height, std::vector<float> rgb)
    : ColorImage(Raster<float>(width, height, 3, std::move(rgb))) {}

DepthMap::DepthMap(Raster<double> depth) : depth_(std::move(depth)) {
  if (depth_.channels() != 1) {
    throw ValidationError("depth map needs 1 channel, got " + std::to_string(depth_.channels()));
  }
  check_values(depth_, "depth map", [](double v) { return v > 0.0; }, "finite, > 0");
}

DepthMap::DepthMap(int width, int height, std::vector<double> depth)
    : DepthMap(Raster<double>(width, height, 1, std::move(depth))) {}

DepthMap DepthMap::scaled(double s) const {
  if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("depth scale must be positive");
  Raster<double> out = depth_;
  for (double& v : out.data()) v *= s;
  return DepthMap(std::move(out));
}

ShadowImage::ShadowImage(Raster<float> shadow) : shadow_(std::move(shadow)) {
  if (shadow_.channels() != 1) {
    throw ValidationError("shadow image needs 1 channel, got " +
                          std::to_string(shadow_.channels()));
  }
  check_values(shadow_, "shadow image", [](float v) { return v >= 0.0f && v <= 1.0f; },
               "range [0,1]");
}

ShadowImage::ShadowImage(int width, int height, std::vector<float> shadow)
    : ShadowImage(Raster<float>(width, height, 1, std::move(shadow))) {}

}  // namespace relight
