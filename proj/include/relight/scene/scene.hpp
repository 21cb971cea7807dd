#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "relight/raster/camera.hpp"
#include "relight/raster/vec3.hpp"

namespace relight::scene {

inline constexpr int kSceneSchemaVersion = 1;

enum class PrimitiveKind { ground, box, cylinder, wall };

/// World frame: y up, ground at y = center.y for the ground plane.
///   box, wall: center is the solid's centroid; size = full extents along the
///              local (x, y, z) axes; yaw rotates about the vertical axis.
///   cylinder:  vertical; center is the centroid; size.x = radius, size.y = height.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::ground;
  Vec3 center;
  Vec3 size;
  double yaw_deg = 0.0;
  Vec3 albedo{0.5, 0.5, 0.5};
};

/// Camera position plus heading (about world up) and downward pitch; no roll.
struct CameraPose {
  Vec3 position;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
};

struct CameraSpec {
  CameraModel intrinsics;
  int width = 64;
  int height = 64;
  CameraPose pose;
};

/// Sun direction in world space: azimuth about +y from +z toward +x,
/// elevation above the ground plane.
struct Sun {
  double azimuth_deg = 0.0;
  double elevation_deg = 45.0;
  Vec3 world_direction() const;
};

struct SceneSpec {
  int version = kSceneSchemaVersion;
  std::vector<Primitive> primitives;
  CameraSpec camera;
  std::vector<Sun> lights;
  Vec3 sun_color{1.0, 1.0, 1.0};
  double ambient = 0.2;
  Vec3 sky_color{0.55, 0.65, 0.85};
  double far_depth = 1000.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Rigid transform between world and camera space (x right, y down, z forward).
class CameraFrame {
 public:
  explicit CameraFrame(const CameraPose& pose);
  Vec3 to_camera(const Vec3& world_point) const;
  Vec3 dir_to_camera(const Vec3& world_dir) const;
  Vec3 dir_to_world(const Vec3& cam_dir) const;
  const Vec3& origin() const { return origin_; }
  const Vec3& forward() const { return forward_; }

 private:
  Vec3 origin_, right_, down_, forward_;
};

struct Hit {
  double t = 0.0;
  Vec3 normal;  // world space, unit, outward
  int primitive = -1;
};

/// Closed-form nearest intersection with t in (t_min, t_max).
std::optional<Hit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir,
                             double t_min, double t_max);
std::optional<Hit> intersect_scene(const std::vector<Primitive>& prims, const Vec3& origin,
                                   const Vec3& dir, double t_min, double t_max);

/// Sun direction expressed in the scene camera's frame.
LightDirection camera_light(const SceneSpec& spec, int light_index);

void to_json(nlohmann::json& j, const Primitive& p);
void from_json(const nlohmann::json& j, Primitive& p);
void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);

/// Random-scene parameters. Defaults keep the horizon out of frame so that
/// every pixel sees geometry.
struct SceneSamplerConfig {
  int width = 64;
  int height = 64;
  int min_objects = 3;
  int max_objects = 7;
  double layout_radius = 4.5;
  double min_cam_distance = 9.0;
  double max_cam_distance = 13.0;
  double min_pitch_deg = 36.0;
  double max_pitch_deg = 50.0;
  double min_fov_deg = 45.0;
  double max_fov_deg = 65.0;
  double min_sun_elevation_deg = 10.0;
  double max_sun_elevation_deg = 80.0;
};

/// Scene layout for (seed, scene_id) seen from viewpoint `view` with
/// `lights` random suns. Independent streams per scene and viewpoint.
SceneSpec sample_scene(const SceneSamplerConfig& cfg, std::uint64_t seed, int scene_id, int view,
                       int lights);

/// Deterministic stream derivation (splitmix64 of the inputs).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace relight::scene
