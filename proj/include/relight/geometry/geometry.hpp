#pragma once

#include "relight/raster/camera.hpp"
#include "relight/raster/image.hpp"
#include "relight/raster/vec3.hpp"

namespace relight::geometry {

/// Camera-space x,y,z per pixel; z equals the source depth exactly.
class PositionMap {
 public:
  explicit PositionMap(Raster<double> xyz);
  int width() const { return xyz_.width(); }
  int height() const { return xyz_.height(); }
  Vec3 at(int x, int y) const { return {xyz_.at(x, y, 0), xyz_.at(x, y, 1), xyz_.at(x, y, 2)}; }
  const Raster<double>& raster() const { return xyz_; }

 private:
  Raster<double> xyz_;
};

/// Unit camera-space normals; front-facing surfaces have negative z.
class NormalMap {
 public:
  explicit NormalMap(Raster<float> n);
  int width() const { return n_.width(); }
  int height() const { return n_.height(); }
  Vec3 at(int x, int y) const { return {n_.at(x, y, 0), n_.at(x, y, 1), n_.at(x, y, 2)}; }
  const Raster<float>& raster() const { return n_; }
  bool operator==(const NormalMap&) const = default;

 private:
  Raster<float> n_;
};

/// Unit view ray from the camera center through each pixel center.
class DirectionMap {
 public:
  explicit DirectionMap(Raster<float> d);
  int width() const { return d_.width(); }
  int height() const { return d_.height(); }
  Vec3 at(int x, int y) const { return {d_.at(x, y, 0), d_.at(x, y, 1), d_.at(x, y, 2)}; }
  const Raster<float>& raster() const { return d_; }

 private:
  Raster<float> d_;
};

/// Pixel (u,v) -> ((u+0.5-cx)/fx*z, (v+0.5-cy)/fy*z, z).
PositionMap backproject(const DepthMap& depth, const CameraModel& cam);

/// Normalized cross product of the Sobel (1/8) u and v gradients of the
/// position map, oriented toward the camera. Borders replicate edge pixels;
/// degenerate cross products fall back to (0,0,-1).
NormalMap normals_from_depth(const PositionMap& pos);
NormalMap normals_from_depth(const DepthMap& depth, const CameraModel& cam);

/// max(0, <N, l>) per pixel.
ShadowImage lambert_guide(const NormalMap& normals, const LightDirection& light);

DirectionMap direction_map(const CameraModel& cam, int width, int height);

/// Channels R, G, B, lambert_guide.
Raster<float> two_d_features(const ColorImage& img, const NormalMap& normals,
                             const LightDirection& light);

}  // namespace relight::geometry
