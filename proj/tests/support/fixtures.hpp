#pragma once

// Hand-built analytic scenes shared by unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <vector>

#include "relight/eval/metrics.hpp"
#include "relight/models/pipeline.hpp"
#include "relight/raymarch/raymarch.hpp"
#include "relight/scene/render.hpp"
#include "relight/scene/scene.hpp"

namespace fixtures {

using namespace relight;

/// Ground plane seen by a camera at `distance` from the origin, pitched down
/// by `pitch_deg`, looking along world +z.
inline scene::SceneSpec ground_scene(int size = 64, double pitch_deg = 40.0, double distance = 12.0,
                                     double fov_deg = 55.0) {
  scene::SceneSpec s;
  scene::Primitive g;
  g.kind = scene::PrimitiveKind::ground;
  g.albedo = {0.5, 0.5, 0.5};
  s.primitives.push_back(g);
  const double p = pitch_deg * std::numbers::pi / 180.0;
  s.camera.width = size;
  s.camera.height = size;
  s.camera.pose.position = {0.0, distance * std::sin(p), -distance * std::cos(p)};
  s.camera.pose.yaw_deg = 0.0;
  s.camera.pose.pitch_deg = pitch_deg;
  const double f = 0.5 * size / std::tan(0.5 * fov_deg * std::numbers::pi / 180.0);
  s.camera.intrinsics = {f, f, 0.5 * size, 0.5 * size};
  s.ambient = 0.2;
  return s;
}

inline scene::Primitive cylinder(double radius, double height, Vec3 base = {0.0, 0.0, 0.0}) {
  scene::Primitive c;
  c.kind = scene::PrimitiveKind::cylinder;
  c.size = {radius, height, 0.0};
  c.center = {base.x, base.y + 0.5 * height, base.z};
  c.albedo = {0.7, 0.6, 0.5};
  return c;
}

inline scene::Primitive box(Vec3 size, Vec3 base = {0.0, 0.0, 0.0}, double yaw = 0.0) {
  scene::Primitive b;
  b.kind = scene::PrimitiveKind::box;
  b.size = size;
  b.center = {base.x, base.y + 0.5 * size.y, base.z};
  b.yaw_deg = yaw;
  b.albedo = {0.6, 0.6, 0.7};
  return b;
}

/// Rendered view with its direct-caster inputs.
struct View {
  scene::SceneSpec spec;
  scene::RenderedSample sample;
  CameraModel cam;
};

inline View render_view(const scene::SceneSpec& spec, int light = 0) {
  return {spec, scene::render(spec, light), spec.camera.intrinsics};
}

/// Cast-shadow IoU: occlusion found by the direct caster at `tau` against
/// the ray-traced occlusion, over geometry pixels that face the sun in the
/// ground truth (attached shadows depend on the normal estimate, not on tau).
inline double occlusion_iou(const scene::RenderedSample& gt, const raymarch::EpipolarVolume& vol, double tau) {
  const auto occ = raymarch::direct_occlusion(vol, tau);
  Raster<float> a(gt.shadow.width(), gt.shadow.height(), 1), b = a;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (gt.hit.at(x, y) == 0.0f || gt.cosine.at(x, y) == 0.0f) continue;
      a.at(x, y) = occ.at(x, y);
      b.at(x, y) = 1.0f - gt.visibility.at(x, y);
    }
  return eval::iou(a, b);
}

inline raymarch::EpipolarVolume gt_volume(const View& v, int steps = 256) {
  raymarch::RayMarchConfig cfg;
  cfg.steps = steps;
  return raymarch::march_ratios(v.sample.depth, v.sample.color, v.sample.light, v.cam, cfg);
}

inline double direct_iou(const View& v, double tau, int steps = 256) {
  return occlusion_iou(v.sample, gt_volume(v, steps), tau);
}

inline std::vector<double> geometric_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return g;
}

/// tau with the highest occlusion IoU over `grid` (first wins ties).
inline std::pair<double, double> best_tau(const View& v, const std::vector<double>& grid, int steps = 256) {
  const auto vol = gt_volume(v, steps);
  double best = -1.0, arg = grid.front();
  for (double t : grid) {
    const double i = occlusion_iou(v.sample, vol, t);
    if (i > best) {
      best = i;
      arg = t;
    }
  }
  return {arg, best};
}

/// Thin and thick cylinder on the ground, lit from the side and behind.
inline View thin_cylinder() {
  auto s = ground_scene(64, 50.0, 8.0);
  s.primitives.push_back(cylinder(0.25, 2.5));
  s.lights = {{60.0, 30.0}};
  return render_view(s);
}

inline View thick_cylinder() {
  auto s = ground_scene(64, 50.0, 8.0);
  s.primitives.push_back(cylinder(1.2, 2.5));
  s.lights = {{60.0, 30.0}};
  return render_view(s);
}

}  // namespace fixtures
