#pragma once

#include <string>

#include "json.hpp"
#include "relight/raster/vec3.hpp"

namespace relight {

/// Pinhole intrinsics in pixels. Camera looks down +z, x right, y down;
/// pixel (u, v) has its center at (u + 0.5, v + 0.5).
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws ValidationError unless fx, fy are positive and all values finite.
  /// A principal point outside [0,w]x[0,h] only produces a warning.
  void validate(int width = 0, int height = 0) const;
  bool principal_point_inside(int width, int height) const;

  /// Camera-space ray direction (not normalized) through continuous image
  /// point (px, py), scaled so that its z component is 1.
  Vec3 ray_at(double px, double py) const {
    return {(px - cx) / fx, (py - cy) / fy, 1.0};
  }

  bool operator==(const CameraModel&) const = default;
};

void to_json(nlohmann::json& j, const CameraModel& cam);
void from_json(const nlohmann::json& j, CameraModel& cam);

/// Unit vector in camera space pointing from the scene toward the sun.
class LightDirection {
 public:
  /// Throws ValidationError if |v| differs from 1 by more than 1e-6.
  explicit LightDirection(const Vec3& unit);
  static LightDirection normalized(const Vec3& v);

  /// Sun at azimuth/elevation (degrees) in the camera-level frame: the camera
  /// frame with its downward pitch removed. Azimuth 0 points along the
  /// horizontal viewing direction, 90 to the right; elevation is above the
  /// horizon.
  static LightDirection from_angles(double azimuth_deg, double elevation_deg,
                                    double camera_pitch_deg = 0.0);

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }

  bool operator==(const LightDirection&) const = default;

 private:
  Vec3 v_;
};

struct LightAngles {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
};

/// Inverse of LightDirection::from_angles; azimuth in (-180, 180].
LightAngles light_angles(const LightDirection& l, double camera_pitch_deg = 0.0);

void to_json(nlohmann::json& j, const LightDirection& l);
LightDirection light_from_json(const nlohmann::json& j);

}  // namespace relight
