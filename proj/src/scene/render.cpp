#include "relight/scene/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relight::scene {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 primary_dir(const CameraFrame& frame, const CameraModel& cam, int u, int v) {
  // z component 1 in camera space, so the hit distance t equals camera depth.
  return frame.dir_to_world(cam.ray_at(u + 0.5, v + 0.5));
}

}  // namespace

RenderedSample render(const SceneSpec& spec, int light_index) {
  spec.validate();
  const int w = spec.camera.width;
  const int h = spec.camera.height;
  const CameraFrame frame(spec.camera.pose);
  const CameraModel& cam = spec.camera.intrinsics;
  const Vec3 sun = spec.lights.at(static_cast<std::size_t>(light_index)).world_direction();

  Raster<float> color(w, h, 3);
  Raster<double> depth(w, h, 1);
  Raster<float> shadow(w, h, 1);
  Raster<float> normals(w, h, 3);
  Raster<float> vis(w, h, 1);
  Raster<float> cosine(w, h, 1);
  Raster<float> hit(w, h, 1);

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Vec3 d = primary_dir(frame, cam, u, v);
      const auto hr = intersect_scene(spec.primitives, frame.origin(), d, 0.0, kInf);
      if (!hr) {
        color.at(u, v, 0) = static_cast<float>(spec.sky_color.x);
        color.at(u, v, 1) = static_cast<float>(spec.sky_color.y);
        color.at(u, v, 2) = static_cast<float>(spec.sky_color.z);
        depth.at(u, v) = static_cast<double>(static_cast<float>(spec.far_depth));
        normals.at(u, v, 2) = -1.0f;
        continue;
      }
      Vec3 n = hr->normal;
      if (dot(n, d) > 0.0) n = -n;
      const Vec3 p = frame.origin() + d * hr->t;
      const double cos_term = std::max(0.0, dot(n, sun));
      double visible = 0.0;
      if (cos_term > 0.0) {
        const double eps = 1e-7 * (1.0 + norm(p));
        const Vec3 o = p + n * eps;
        visible = intersect_scene(spec.primitives, o, sun, 0.0, kInf) ? 0.0 : 1.0;
      }
      const Primitive& prim = spec.primitives[static_cast<std::size_t>(hr->primitive)];
      const double direct = visible * cos_term;
      const Vec3 rad{prim.albedo.x * (spec.ambient + direct * spec.sun_color.x),
                     prim.albedo.y * (spec.ambient + direct * spec.sun_color.y),
                     prim.albedo.z * (spec.ambient + direct * spec.sun_color.z)};
      color.at(u, v, 0) = static_cast<float>(rad.x);
      color.at(u, v, 1) = static_cast<float>(rad.y);
      color.at(u, v, 2) = static_cast<float>(rad.z);
      depth.at(u, v) = static_cast<double>(static_cast<float>(hr->t));
      shadow.at(u, v) = static_cast<float>(direct);
      const Vec3 nc = frame.dir_to_camera(n);
      normals.at(u, v, 0) = static_cast<float>(nc.x);
      normals.at(u, v, 1) = static_cast<float>(nc.y);
      normals.at(u, v, 2) = static_cast<float>(nc.z);
      vis.at(u, v) = static_cast<float>(visible);
      cosine.at(u, v) = static_cast<float>(cos_term);
      hit.at(u, v) = 1.0f;
    }
  }
  return RenderedSample{ColorImage(std::move(color)),
                        DepthMap(std::move(depth)),
                        ShadowImage(std::move(shadow)),
                        geometry::NormalMap(std::move(normals)),
                        std::move(vis),
                        std::move(cosine),
                        std::move(hit),
                        camera_light(spec, light_index)};
}

bool covers_pixels(const SceneSpec& spec, const Primitive& prim) {
  const CameraFrame frame(spec.camera.pose);
  for (int v = 0; v < spec.camera.height; ++v) {
    for (int u = 0; u < spec.camera.width; ++u) {
      const Vec3 d = primary_dir(frame, spec.camera.intrinsics, u, v);
      if (intersect(prim, frame.origin(), d, 0.0, kInf)) return true;
    }
  }
  return false;
}

SceneSpec cull_offscreen(const SceneSpec& spec) {
  SceneSpec out = spec;
  out.primitives.clear();
  for (const Primitive& p : spec.primitives) {
    if (p.kind == PrimitiveKind::ground || covers_pixels(spec, p)) out.primitives.push_back(p);
  }
  return out;
}

}  // namespace relight::scene
