#include "relight/raster/camera.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include "relight/errors.hpp"

namespace relight {

void CameraModel::validate(int width, int height) const {
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw ValidationError("camera intrinsics must be finite");
  }
  if (fx <= 0.0 || fy <= 0.0) {
    throw ValidationError("camera focal lengths must be positive, got fx=" + std::to_string(fx) +
                          " fy=" + std::to_string(fy));
  }
  if (width > 0 && height > 0 && !principal_point_inside(width, height)) {
    std::clog << "warning: principal point (" << cx << ", " << cy << ") lies outside the "
              << width << "x" << height << " image\n";
  }
}

bool CameraModel::principal_point_inside(int width, int height) const {
  return cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height;
}

void to_json(nlohmann::json& j, const CameraModel& cam) {
  j = nlohmann::json{{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx}, {"cy", cam.cy}};
}

void from_json(const nlohmann::json& j, CameraModel& cam) {
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
}

LightDirection::LightDirection(const Vec3& unit) : v_(unit) {
  if (!is_finite(unit) || std::abs(norm(unit) - 1.0) > 1e-6) {
    throw ValidationError("light direction must be a unit vector");
  }
}

LightDirection LightDirection::normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalize light direction");
  return LightDirection(v / n);
}

LightDirection LightDirection::from_angles(double azimuth_deg, double elevation_deg,
                                           double camera_pitch_deg) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double az = azimuth_deg * deg;
  const double el = elevation_deg * deg;
  const double p = camera_pitch_deg * deg;
  const Vec3 level{std::cos(el) * std::sin(az), -std::sin(el), std::cos(el) * std::cos(az)};
  // Camera pitched down by p: camera z = level (0, sin p, cos p), camera y = (0, cos p, -sin p).
  const Vec3 cam{level.x, level.y * std::cos(p) - level.z * std::sin(p),
                 level.y * std::sin(p) + level.z * std::cos(p)};
  return normalized(cam);
}

LightAngles light_angles(const LightDirection& l, double camera_pitch_deg) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double p = camera_pitch_deg * deg;
  const Vec3& c = l.vec();
  const Vec3 level{c.x, c.y * std::cos(p) + c.z * std::sin(p), -c.y * std::sin(p) + c.z * std::cos(p)};
  return {std::atan2(level.x, level.z) / deg,
          std::asin(std::clamp(-level.y, -1.0, 1.0)) / deg};
}

void to_json(nlohmann::json& j, const LightDirection& l) {
  j = nlohmann::json::array({l.x(), l.y(), l.z()});
}

LightDirection light_from_json(const nlohmann::json& j) {
  return LightDirection({j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()});
}

}  // namespace relight
