#include "relight/scene/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "relight/errors.hpp"

namespace relight::scene {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 rotate_y(const Vec3& v, double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  return {v.x * c + v.z * s, v.y, -v.x * s + v.z * c};
}

std::optional<Hit> intersect_ground(const Primitive& p, const Vec3& o, const Vec3& d,
                                    double t_min, double t_max) {
  if (d.y == 0.0) return std::nullopt;
  const double t = (p.center.y - o.y) / d.y;
  if (!(t > t_min && t < t_max)) return std::nullopt;
  return Hit{t, {0.0, 1.0, 0.0}, -1};
}

std::optional<Hit> intersect_box(const Primitive& p, const Vec3& o, const Vec3& d, double t_min,
                                 double t_max) {
  const double yaw = p.yaw_deg * kDeg;
  const Vec3 lo = rotate_y(o - p.center, -yaw);
  const Vec3 ld = rotate_y(d, -yaw);
  const double half[3] = {p.size.x * 0.5, p.size.y * 0.5, p.size.z * 0.5};
  const double org[3] = {lo.x, lo.y, lo.z};
  const double dir[3] = {ld.x, ld.y, ld.z};
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  double near_sign = 0.0;
  int far_axis = -1;
  double far_sign = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (org[a] < -half[a] || org[a] > half[a]) return std::nullopt;
      continue;
    }
    double t0 = (-half[a] - org[a]) / dir[a];
    double t1 = (half[a] - org[a]) / dir[a];
    double s0 = -1.0;  // outward normal sign of the face hit at t0
    double s1 = 1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      std::swap(s0, s1);
    }
    if (t0 > t_near) {
      t_near = t0;
      near_axis = a;
      near_sign = s0;
    }
    if (t1 < t_far) {
      t_far = t1;
      far_axis = a;
      far_sign = s1;
    }
    if (t_near > t_far) return std::nullopt;
  }
  double t = t_near;
  int axis = near_axis;
  double sign = near_sign;
  if (!(t > t_min)) {
    // Origin inside the box: report the exit face.
    t = t_far;
    axis = far_axis;
    sign = far_sign;
  }
  if (!(t > t_min && t < t_max) || axis < 0) return std::nullopt;
  Vec3 n_local{0.0, 0.0, 0.0};
  (axis == 0 ? n_local.x : axis == 1 ? n_local.y : n_local.z) = sign;
  return Hit{t, rotate_y(n_local, yaw), -1};
}

std::optional<Hit> intersect_cylinder(const Primitive& p, const Vec3& o, const Vec3& d,
                                      double t_min, double t_max) {
  const double r = p.size.x;
  const double h2 = p.size.y * 0.5;
  const Vec3 q = o - p.center;
  std::optional<Hit> best;
  auto consider = [&](double t, const Vec3& n) {
    if (t > t_min && t < t_max && (!best || t < best->t)) best = Hit{t, n, -1};
  };
  const double a = d.x * d.x + d.z * d.z;
  if (a > 0.0) {
    const double b = 2.0 * (q.x * d.x + q.z * d.z);
    const double c = q.x * q.x + q.z * q.z - r * r;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      // Numerically stable quadratic roots.
      const double qq = -0.5 * (b + std::copysign(sq, b));
      double roots[2] = {qq / a, qq != 0.0 ? c / qq : qq / a};
      for (double t : roots) {
        const double y = q.y + t * d.y;
        if (y >= -h2 && y <= h2) {
          const Vec3 n{(q.x + t * d.x) / r, 0.0, (q.z + t * d.z) / r};
          consider(t, normalize(n));
        }
      }
    }
  }
  if (d.y != 0.0) {
    for (double cap : {h2, -h2}) {
      const double t = (cap - q.y) / d.y;
      const double x = q.x + t * d.x;
      const double z = q.z + t * d.z;
      if (x * x + z * z <= r * r) consider(t, {0.0, cap > 0.0 ? 1.0 : -1.0, 0.0});
    }
  }
  return best;
}

const char* kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::ground:
      return "ground";
    case PrimitiveKind::box:
      return "box";
    case PrimitiveKind::cylinder:
      return "cylinder";
    case PrimitiveKind::wall:
      return "wall";
  }
  return "?";
}

PrimitiveKind kind_from_name(const std::string& s) {
  if (s == "ground") return PrimitiveKind::ground;
  if (s == "box") return PrimitiveKind::box;
  if (s == "cylinder") return PrimitiveKind::cylinder;
  if (s == "wall") return PrimitiveKind::wall;
  throw ValidationError("unknown primitive kind '" + s + "'");
}

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }
Vec3 vec_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

Vec3 Sun::world_direction() const {
  const double az = azimuth_deg * kDeg;
  const double el = elevation_deg * kDeg;
  return {std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
}

void SceneSpec::validate() const {
  if (version != kSceneSchemaVersion) {
    throw ValidationError("unsupported scene schema version " + std::to_string(version));
  }
  const bool has_ground = std::any_of(primitives.begin(), primitives.end(), [](const Primitive& p) {
    return p.kind == PrimitiveKind::ground;
  });
  if (!has_ground) throw ValidationError("scene needs a ground plane");
  if (camera.width <= 0 || camera.height <= 0) throw ValidationError("camera size must be positive");
  camera.intrinsics.validate(camera.width, camera.height);
  for (const Primitive& p : primitives) {
    if (p.kind == PrimitiveKind::ground) continue;
    if (!(p.size.x > 0.0 && p.size.y > 0.0) ||
        ((p.kind == PrimitiveKind::box || p.kind == PrimitiveKind::wall) && !(p.size.z > 0.0))) {
      throw ValidationError(std::string("primitive '") + kind_name(p.kind) + "' has non-positive size");
    }
  }
  if (ambient < 0.0 || !(far_depth > 0.0)) throw ValidationError("invalid lighting parameters");
}

CameraFrame::CameraFrame(const CameraPose& pose) : origin_(pose.position) {
  const double yaw = pose.yaw_deg * kDeg;
  const double pitch = pose.pitch_deg * kDeg;
  forward_ = {std::sin(yaw) * std::cos(pitch), -std::sin(pitch), std::cos(yaw) * std::cos(pitch)};
  const Vec3 up{0.0, 1.0, 0.0};
  down_ = normalize(-up + forward_ * dot(up, forward_));
  right_ = cross(down_, forward_);
}

Vec3 CameraFrame::to_camera(const Vec3& p) const { return dir_to_camera(p - origin_); }

Vec3 CameraFrame::dir_to_camera(const Vec3& d) const {
  return {dot(d, right_), dot(d, down_), dot(d, forward_)};
}

Vec3 CameraFrame::dir_to_world(const Vec3& c) const {
  return right_ * c.x + down_ * c.y + forward_ * c.z;
}

std::optional<Hit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir,
                             double t_min, double t_max) {
  switch (prim.kind) {
    case PrimitiveKind::ground:
      return intersect_ground(prim, origin, dir, t_min, t_max);
    case PrimitiveKind::box:
    case PrimitiveKind::wall:
      return intersect_box(prim, origin, dir, t_min, t_max);
    case PrimitiveKind::cylinder:
      return intersect_cylinder(prim, origin, dir, t_min, t_max);
  }
  return std::nullopt;
}

std::optional<Hit> intersect_scene(const std::vector<Primitive>& prims, const Vec3& origin,
                                   const Vec3& dir, double t_min, double t_max) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    auto h = intersect(prims[i], origin, dir, t_min, best ? best->t : t_max);
    if (h) {
      h->primitive = static_cast<int>(i);
      best = h;
    }
  }
  return best;
}

LightDirection camera_light(const SceneSpec& spec, int light_index) {
  const CameraFrame frame(spec.camera.pose);
  return LightDirection::normalized(
      frame.dir_to_camera(spec.lights.at(static_cast<std::size_t>(light_index)).world_direction()));
}

void to_json(nlohmann::json& j, const Primitive& p) {
  j = nlohmann::json{{"kind", kind_name(p.kind)},
                     {"center", vec_json(p.center)},
                     {"size", vec_json(p.size)},
                     {"yaw_deg", p.yaw_deg},
                     {"albedo", vec_json(p.albedo)}};
}

void from_json(const nlohmann::json& j, Primitive& p) {
  p.kind = kind_from_name(j.at("kind").get<std::string>());
  p.center = vec_from(j.at("center"));
  p.size = vec_from(j.at("size"));
  p.yaw_deg = j.at("yaw_deg").get<double>();
  p.albedo = vec_from(j.at("albedo"));
}

void to_json(nlohmann::json& j, const SceneSpec& s) {
  nlohmann::json lights = nlohmann::json::array();
  for (const Sun& l : s.lights) {
    lights.push_back({{"azimuth_deg", l.azimuth_deg}, {"elevation_deg", l.elevation_deg}});
  }
  j = nlohmann::json{
      {"version", s.version},
      {"primitives", s.primitives},
      {"camera",
       {{"intrinsics", s.camera.intrinsics},
        {"width", s.camera.width},
        {"height", s.camera.height},
        {"position", vec_json(s.camera.pose.position)},
        {"yaw_deg", s.camera.pose.yaw_deg},
        {"pitch_deg", s.camera.pose.pitch_deg}}},
      {"lights", lights},
      {"sun_color", vec_json(s.sun_color)},
      {"ambient", s.ambient},
      {"sky_color", vec_json(s.sky_color)},
      {"far_depth", s.far_depth},
      {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SceneSpec& s) {
  s.version = j.at("version").get<int>();
  s.primitives = j.at("primitives").get<std::vector<Primitive>>();
  const auto& c = j.at("camera");
  s.camera.intrinsics = c.at("intrinsics").get<CameraModel>();
  s.camera.width = c.at("width").get<int>();
  s.camera.height = c.at("height").get<int>();
  s.camera.pose.position = vec_from(c.at("position"));
  s.camera.pose.yaw_deg = c.at("yaw_deg").get<double>();
  s.camera.pose.pitch_deg = c.at("pitch_deg").get<double>();
  s.lights.clear();
  for (const auto& l : j.at("lights")) {
    s.lights.push_back({l.at("azimuth_deg").get<double>(), l.at("elevation_deg").get<double>()});
  }
  s.sun_color = vec_from(j.at("sun_color"));
  s.ambient = j.at("ambient").get<double>();
  s.sky_color = vec_from(j.at("sky_color"));
  s.far_depth = j.at("far_depth").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return h;
}

SceneSpec sample_scene(const SceneSamplerConfig& cfg, std::uint64_t seed, int scene_id, int view,
                       int lights) {
  // Layout depends on the scene only; camera and suns on the viewpoint.
  std::mt19937_64 layout_rng(derive_seed(seed, 1, static_cast<std::uint64_t>(scene_id)));
  std::mt19937_64 view_rng(derive_seed(seed, 2, static_cast<std::uint64_t>(scene_id),
                                       static_cast<std::uint64_t>(view)));
  auto uni = [](std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
  };

  SceneSpec s;
  s.seed = seed;
  Primitive ground;
  ground.kind = PrimitiveKind::ground;
  const double g = uni(layout_rng, 0.35, 0.7);
  ground.albedo = {g * uni(layout_rng, 0.9, 1.1), g, g * uni(layout_rng, 0.85, 1.05)};
  s.primitives.push_back(ground);

  const int n_obj = std::uniform_int_distribution<int>(cfg.min_objects, cfg.max_objects)(layout_rng);
  for (int i = 0; i < n_obj; ++i) {
    Primitive p;
    const double pick = uni(layout_rng, 0.0, 1.0);
    const double rad = cfg.layout_radius * std::sqrt(uni(layout_rng, 0.0, 1.0));
    const double ang = uni(layout_rng, 0.0, 2.0 * std::numbers::pi);
    const double px = rad * std::cos(ang);
    const double pz = rad * std::sin(ang);
    if (pick < 0.4) {
      p.kind = PrimitiveKind::box;
      p.size = {uni(layout_rng, 0.6, 2.6), uni(layout_rng, 0.5, 3.0), uni(layout_rng, 0.6, 2.6)};
      p.yaw_deg = uni(layout_rng, 0.0, 90.0);
    } else if (pick < 0.75) {
      p.kind = PrimitiveKind::cylinder;
      p.size = {uni(layout_rng, 0.12, 0.8), uni(layout_rng, 1.0, 4.0), 0.0};
    } else {
      p.kind = PrimitiveKind::wall;
      p.size = {uni(layout_rng, 2.0, 5.0), uni(layout_rng, 0.8, 2.5), uni(layout_rng, 0.15, 0.45)};
      p.yaw_deg = uni(layout_rng, 0.0, 180.0);
    }
    p.center = {px, p.size.y * 0.5, pz};
    p.albedo = {uni(layout_rng, 0.2, 0.9), uni(layout_rng, 0.2, 0.9), uni(layout_rng, 0.2, 0.9)};
    s.primitives.push_back(p);
  }
  s.ambient = uni(layout_rng, 0.15, 0.35);
  const double sun = uni(layout_rng, 0.9, 1.2);
  s.sun_color = {sun, sun * 0.96, sun * 0.88};

  // Camera orbiting the layout, looking at a point near the origin.
  const double heading = uni(view_rng, 0.0, 360.0);
  const double dist = uni(view_rng, cfg.min_cam_distance, cfg.max_cam_distance);
  const double pitch = uni(view_rng, cfg.min_pitch_deg, cfg.max_pitch_deg);
  const double fov = uni(view_rng, cfg.min_fov_deg, cfg.max_fov_deg);
  const Vec3 target{uni(view_rng, -1.0, 1.0), 0.0, uni(view_rng, -1.0, 1.0)};
  const double yaw = heading;  // camera looks along heading
  const Vec3 horizontal{std::sin(yaw * kDeg), 0.0, std::cos(yaw * kDeg)};
  const double height = dist * std::tan(pitch * kDeg);
  s.camera.width = cfg.width;
  s.camera.height = cfg.height;
  s.camera.pose.position = target - horizontal * dist + Vec3{0.0, height, 0.0};
  s.camera.pose.yaw_deg = yaw;
  s.camera.pose.pitch_deg = pitch;
  const double f = 0.5 * cfg.width / std::tan(0.5 * fov * kDeg);
  s.camera.intrinsics = CameraModel{f, f, 0.5 * cfg.width, 0.5 * cfg.height};

  for (int k = 0; k < lights; ++k) {
    s.lights.push_back({uni(view_rng, 0.0, 360.0),
                        uni(view_rng, cfg.min_sun_elevation_deg, cfg.max_sun_elevation_deg)});
  }
  s.validate();
  return s;
}

}  // namespace relight::scene
