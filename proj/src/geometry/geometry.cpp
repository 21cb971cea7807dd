#include "relight/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace relight::geometry {

namespace {

template <typename T>
void require_finite(const Raster<T>& r, const char* what) {
  for (T v : r.data()) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " contains non-finite values");
  }
}

template <typename T>
void require_unit(const Raster<T>& r, const char* what, double tol) {
  if (r.channels() != 3) throw ValidationError(std::string(what) + " needs 3 channels");
  require_finite(r, what);
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      const double n = std::sqrt(double(r.at(x, y, 0)) * r.at(x, y, 0) +
                                 double(r.at(x, y, 1)) * r.at(x, y, 1) +
                                 double(r.at(x, y, 2)) * r.at(x, y, 2));
      if (std::abs(n - 1.0) > tol) throw ValidationError(std::string(what) + " has a non-unit vector");
    }
  }
}

}  // namespace

PositionMap::PositionMap(Raster<double> xyz) : xyz_(std::move(xyz)) {
  if (xyz_.channels() != 3) throw ValidationError("position map needs 3 channels");
  require_finite(xyz_, "position map");
}

NormalMap::NormalMap(Raster<float> n) : n_(std::move(n)) { require_unit(n_, "normal map", 1e-5); }

DirectionMap::DirectionMap(Raster<float> d) : d_(std::move(d)) {
  require_unit(d_, "direction map", 1e-5);
}

PositionMap backproject(const DepthMap& depth, const CameraModel& cam) {
  cam.validate();
  Raster<double> xyz(depth.width(), depth.height(), 3);
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double z = depth.at(u, v);
      const Vec3 r = cam.ray_at(u + 0.5, v + 0.5);
      xyz.at(u, v, 0) = r.x * z;
      xyz.at(u, v, 1) = r.y * z;
      xyz.at(u, v, 2) = z;
    }
  }
  return PositionMap(std::move(xyz));
}

NormalMap normals_from_depth(const PositionMap& pos) {
  const int w = pos.width();
  const int h = pos.height();
  Raster<float> out(w, h, 3);
  auto sample = [&](int x, int y) {
    return pos.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Sobel with 1/8 weights.
      const Vec3 du = ((sample(x + 1, y - 1) - sample(x - 1, y - 1)) +
                       (sample(x + 1, y) - sample(x - 1, y)) * 2.0 +
                       (sample(x + 1, y + 1) - sample(x - 1, y + 1))) /
                      8.0;
      const Vec3 dv = ((sample(x - 1, y + 1) - sample(x - 1, y - 1)) +
                       (sample(x, y + 1) - sample(x, y - 1)) * 2.0 +
                       (sample(x + 1, y + 1) - sample(x + 1, y - 1))) /
                      8.0;
      // With y pointing down, du x dv points away from the camera.
      const Vec3 c = cross(dv, du);
      const double len = norm(c);
      Vec3 n{0.0, 0.0, -1.0};
      if (len > 0.0 && std::isfinite(len)) n = c / len;
      const float nx = static_cast<float>(n.x);
      const float ny = static_cast<float>(n.y);
      const float nz = static_cast<float>(n.z);
      out.at(x, y, 0) = nx;
      out.at(x, y, 1) = ny;
      out.at(x, y, 2) = nz;
    }
  }
  return NormalMap(std::move(out));
}

NormalMap normals_from_depth(const DepthMap& depth, const CameraModel& cam) {
  return normals_from_depth(backproject(depth, cam));
}

ShadowImage lambert_guide(const NormalMap& normals, const LightDirection& light) {
  Raster<float> out(normals.width(), normals.height(), 1);
  const Vec3& l = light.vec();
  for (int y = 0; y < normals.height(); ++y) {
    for (int x = 0; x < normals.width(); ++x) {
      const double c = dot(normals.at(x, y), l);
      out.at(x, y) = static_cast<float>(std::clamp(c, 0.0, 1.0));
    }
  }
  return ShadowImage(std::move(out));
}

DirectionMap direction_map(const CameraModel& cam, int width, int height) {
  cam.validate();
  Raster<float> out(width, height, 3);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const Vec3 d = normalize(cam.ray_at(u + 0.5, v + 0.5));
      out.at(u, v, 0) = static_cast<float>(d.x);
      out.at(u, v, 1) = static_cast<float>(d.y);
      out.at(u, v, 2) = static_cast<float>(d.z);
    }
  }
  return DirectionMap(std::move(out));
}

Raster<float> two_d_features(const ColorImage& img, const NormalMap& normals,
                             const LightDirection& light) {
  if (img.width() != normals.width() || img.height() != normals.height()) {
    throw ValidationError("two_d_features: color " + shape_string(img.width(), img.height(), 3) +
                          " vs normals " + shape_string(normals.width(), normals.height(), 3));
  }
  const ShadowImage cosine = lambert_guide(normals, light);
  Raster<float> out(img.width(), img.height(), 4);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, c);
      out.at(x, y, 3) = cosine.at(x, y);
    }
  }
  return out;
}

}  // namespace relight::geometry
