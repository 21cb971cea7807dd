#include <cmath>
#include <random>

#include "doctest.h"
#include "relight/errors.hpp"
#include "relight/geometry/geometry.hpp"
#include "support/fixtures.hpp"

using namespace relight;
using namespace relight::raymarch;

namespace {

DepthMap plane(int w, int h, double z) { return DepthMap(w, h, std::vector<double>(std::size_t(w) * h, z)); }

ColorImage gray(int w, int h) { return ColorImage(w, h, std::vector<float>(std::size_t(w) * h * 3, 0.5f)); }

// Screen direction by projecting two points of the 3D ray (oracle for
// project_light_dir).
ScreenDir two_point_projection(const LightDirection& l, const CameraModel& cam, double px, double py, double z) {
  const Vec3 x0 = cam.ray_at(px, py) * z;
  const double t = 1e-6 * z;
  const Vec3 x1 = x0 + l.vec() * t;
  const double u1 = cam.fx * x1.x / x1.z + cam.cx, v1 = cam.fy * x1.y / x1.z + cam.cy;
  const double dx = u1 - px, dy = v1 - py;
  const double n = std::hypot(dx, dy);
  return {dx / n, dy / n};
}

}  // namespace

TEST_CASE("lateral light projects to itself at the center pixel") {
  const CameraModel cam{32.0, 32.0, 32.0, 32.0};
  const auto d = project_light_dir(LightDirection({1.0, 0.0, 0.0}), cam, 32.0, 32.0);
  CHECK(d.x == doctest::Approx(1.0));
  CHECK(d.y == doctest::Approx(0.0));
}

TEST_CASE("sun high behind the camera projects upward") {
  const CameraModel cam{32.0, 32.0, 32.0, 32.0};
  const double r = std::sqrt(0.5);
  const LightDirection l({0.0, -r, -r});
  const auto d = project_light_dir(l, cam, 32.0, 32.0);
  CHECK(d.x == doctest::Approx(0.0));
  CHECK(d.y == doctest::Approx(-1.0));
  const auto o = two_point_projection(l, cam, 32.0, 32.0, 5.0);
  CHECK(o.y == doctest::Approx(-1.0));
}

TEST_CASE("projected direction matches two-point projection and ignores depth") {
  const CameraModel cam{40.0, 36.0, 30.0, 34.0};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0), px(0.0, 64.0), z(1.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const auto l = LightDirection::normalized({u(rng), u(rng), u(rng)});
    const double x = px(rng), y = px(rng);
    ScreenDir d;
    try {
      d = project_light_dir(l, cam, x, y);
    } catch (const DegenerateProjection&) {
      continue;
    }
    for (double zz : {z(rng), z(rng)}) {
      const auto o = two_point_projection(l, cam, x, y, zz);
      CHECK(d.x == doctest::Approx(o.x).epsilon(1e-4));
      CHECK(d.y == doctest::Approx(o.y).epsilon(1e-4));
    }
  }
}

TEST_CASE("light along the view ray is degenerate") {
  const CameraModel cam{32.0, 32.0, 32.0, 32.0};
  CHECK_THROWS_AS(project_light_dir(LightDirection({0.0, 0.0, -1.0}), cam, 32.0, 32.0), DegenerateProjection);
  CHECK_THROWS_AS(project_light_dir(LightDirection({0.0, 0.0, 1.0}), cam, 32.0, 32.0), DegenerateProjection);
  const auto v = LightDirection::normalized(cam.ray_at(10.5, 50.5));
  CHECK_THROWS_AS(project_light_dir(v, cam, 10.5, 50.5), DegenerateProjection);
}

TEST_CASE("degenerate pixels get sentinel samples and stay lit") {
  const CameraModel cam{16.0, 16.0, 8.5, 8.5};  // pixel (8,8) center on the axis
  RayMarchConfig cfg;
  cfg.steps = 8;
  const auto vol = march_ratios(plane(17, 17, 4.0), gray(17, 17), LightDirection({0.0, 0.0, -1.0}), cam, cfg);
  for (int k = 0; k < 8; ++k) {
    CHECK_FALSE(vol.valid(k, 8, 8));
    CHECK(vol.ratio(k, 8, 8) == cfg.border_sentinel);
  }
  const ShadowImage lam(17, 17, std::vector<float>(17 * 17, 1.0f));
  CHECK(direct_shadow(vol, lam, cfg).at(8, 8) == 1.0f);
}

TEST_CASE("flat plane with lateral light gives ratios of one") {
  const CameraModel cam{32.0, 32.0, 16.0, 16.0};
  RayMarchConfig cfg;
  cfg.steps = 16;
  const auto vol = march_ratios(plane(32, 32, 3.0), gray(32, 32), LightDirection({1.0, 0.0, 0.0}), cam, cfg);
  int valid = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int k = 0; k < 16; ++k)
        if (vol.valid(k, x, y)) {
          ++valid;
          CHECK(vol.ratio(k, x, y) == doctest::Approx(1.0).epsilon(1e-6));
          CHECK(vol.at(0, k, x, y) == doctest::Approx(0.5f));
        }
  CHECK(valid > 0);
}

TEST_CASE("ray toward the camera is in front of the surface") {
  // Light tilted toward the camera: the marched point gets closer than the
  // observed plane, so ratio = D / z_ray > 1.
  const CameraModel cam{32.0, 32.0, 16.0, 16.0};
  RayMarchConfig cfg;
  cfg.steps = 16;
  const auto l = LightDirection::normalized({0.7, -0.2, -0.5});
  const auto vol = march_ratios(plane(32, 32, 3.0), gray(32, 32), l, cam, cfg);
  int valid = 0;
  for (int k = 0; k < 16; ++k)
    if (vol.valid(k, 16, 16)) {
      ++valid;
      CHECK(vol.ratio(k, 16, 16) > 1.0f);
    }
  CHECK(valid > 0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int k = 0; k < 16; ++k)
        if (!vol.valid(k, x, y)) {
          CHECK(vol.ratio(k, x, y) == cfg.border_sentinel);
          CHECK(vol.at(0, k, x, y) == 0.0f);
        }
}

TEST_CASE("no occluders: direct shadow equals lambert") {
  auto s = fixtures::ground_scene();
  s.lights = {{30.0, 60.0}};
  const auto v = fixtures::render_view(s);
  const models::PreparedView pv(v.sample.color, v.sample.depth, v.cam);
  const auto lam = geometry::lambert_guide(pv.normals, v.sample.light);
  RayMarchConfig cfg;
  for (double tau : {0.01, 0.1, std::numeric_limits<double>::infinity()}) {
    cfg.tau = tau;
    const auto vol = march_ratios(pv.depth, pv.color, v.sample.light, pv.camera, cfg);
    CHECK(direct_shadow(vol, lam, cfg) == lam);
  }
}

TEST_CASE("occluded pixels see a ratio near one on a box scene") {
  auto s = fixtures::ground_scene();
  s.primitives.push_back(fixtures::box({1.5, 2.0, 1.5}));
  s.lights = {{70.0, 40.0}};
  const auto v = fixtures::render_view(s);
  RayMarchConfig cfg;
  const auto vol = march_ratios(v.sample.depth, v.sample.color, v.sample.light, v.cam, cfg);
  int occluded = 0, near_one = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      if (v.sample.hit.at(x, y) == 0.0f || v.sample.visibility.at(x, y) != 0.0f) continue;
      if (v.sample.cosine.at(x, y) == 0.0f) continue;  // attached shadow
      ++occluded;
      double best = 1e9;
      for (int k = 0; k < cfg.steps; ++k)
        if (vol.valid(k, x, y)) best = std::min(best, std::abs(double(vol.ratio(k, x, y)) - 1.0));
      if (best < 0.02) ++near_one;
    }
  REQUIRE(occluded > 20);
  CHECK(near_one >= 0.95 * occluded);
}

TEST_CASE("ratio volumes are bit-identical under depth scaling") {
  auto s = fixtures::ground_scene();
  s.primitives.push_back(fixtures::box({1.0, 2.5, 1.0}, {1.0, 0.0, 0.5}, 20.0));
  s.primitives.push_back(fixtures::cylinder(0.4, 2.0, {-1.5, 0.0, -0.5}));
  s.lights = {{120.0, 30.0}};
  const auto v = fixtures::render_view(s);
  RayMarchConfig cfg;
  cfg.steps = 64;
  const auto base = march_ratios(v.sample.depth, v.sample.color, v.sample.light, v.cam, cfg);
  for (double k : {0.5, 3.7}) {
    const auto scaled = march_ratios(v.sample.depth.scaled(k), v.sample.color, v.sample.light, v.cam, cfg);
    CHECK(scaled == base);
  }
}

TEST_CASE("marching is deterministic and the volume blob round trips") {
  const auto v = fixtures::thin_cylinder();
  RayMarchConfig cfg;
  cfg.steps = 32;
  cfg.tau = 0.07;
  const auto a = march_ratios(v.sample.depth, v.sample.color, v.sample.light, v.cam, cfg);
  const auto b = march_ratios(v.sample.depth, v.sample.color, v.sample.light, v.cam, cfg);
  CHECK(a == b);
  RayMarchConfig back;
  const auto bytes = encode_volume(a, cfg);
  CHECK(decode_volume(bytes, &back) == a);
  CHECK(back == cfg);
  CHECK(encode_volume(decode_volume(bytes), cfg) == bytes);
}

TEST_CASE("enlarging tau never shrinks the occluded set") {
  const auto v = fixtures::thick_cylinder();
  RayMarchConfig cfg;
  const auto vol = march_ratios(v.sample.depth, v.sample.color, v.sample.light, v.cam, cfg);
  const auto taus = fixtures::geometric_grid(1e-3, 10.0, 12);
  auto prev = direct_occlusion(vol, taus[0]);
  for (std::size_t i = 1; i < taus.size(); ++i) {
    const auto cur = direct_occlusion(vol, taus[i]);
    for (std::size_t p = 0; p < cur.size(); ++p) CHECK(cur.storage()[p] >= prev.storage()[p]);
    prev = cur;
  }
  const auto inf = direct_occlusion(vol, std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < inf.size(); ++p) CHECK(inf.storage()[p] >= prev.storage()[p]);
}

TEST_CASE("thin and thick cylinders want different thresholds") {
  const auto grid = fixtures::geometric_grid(2e-3, 2.0, 31);
  const auto thin = fixtures::best_tau(fixtures::thin_cylinder(), grid);
  const auto thick = fixtures::best_tau(fixtures::thick_cylinder(), grid);
  MESSAGE("thin tau " << thin.first << " iou " << thin.second << ", thick tau " << thick.first << " iou "
                      << thick.second);
  CHECK(thick.first >= 2.0 * thin.first);
}

TEST_CASE("infinite thickness over-shadows an arch") {
  auto s = fixtures::ground_scene(64, 35.0, 13.0);
  s.primitives.push_back(fixtures::box({0.6, 3.0, 0.6}, {-1.6, 0.0, 0.0}));
  s.primitives.push_back(fixtures::box({0.6, 3.0, 0.6}, {1.6, 0.0, 0.0}));
  s.primitives.push_back(fixtures::box({3.8, 0.6, 0.6}, {0.0, 3.0, 0.0}));
  s.lights = {{90.0, 65.0}};
  const auto v = fixtures::render_view(s);
  const double at_inf = fixtures::direct_iou(v, std::numeric_limits<double>::infinity());
  const auto tuned = fixtures::best_tau(v, fixtures::geometric_grid(2e-3, 2.0, 31));
  MESSAGE("arch iou tau=inf " << at_inf << ", tuned " << tuned.second << " at " << tuned.first);
  // The ray-traced ground truth has IoU 1 with itself.
  CHECK(at_inf < 1.0);
  CHECK(at_inf < tuned.second);
}

TEST_CASE("shadow image from visibility") {
  const ShadowImage lam(3, 1, {0.7f, 0.7f, 0.2f});
  const Raster<float> vis(3, 1, 1, std::vector<float>{1.0f, 0.0f, 0.0f});
  const auto s = shadow_image_from_visibility(vis, lam);
  CHECK(s.at(0, 0) == 0.7f);
  CHECK(s.at(1, 0) == 0.0f);
  CHECK(s.at(2, 0) == 0.0f);
  CHECK_THROWS_AS(shadow_image_from_visibility(Raster<float>(3, 1, 1, std::vector<float>{1.0f, 0.5f, 0.0f}), lam),
                  ValidationError);
}

TEST_CASE("shadow contrast is smaller under a grazing sun") {
  auto s = fixtures::ground_scene();
  s.primitives.push_back(fixtures::box({1.5, 1.5, 1.5}));
  s.lights = {{60.0, 12.0}, {60.0, 70.0}};
  auto gap = [&](int light) {
    const auto r = scene::render(s, light);
    double lit = 0.0, dark = 0.0;
    int nl = 0, nd = 0;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        if (r.hit.at(x, y) == 0.0f) continue;
        if (r.visibility.at(x, y) == 1.0f) {
          lit += r.shadow.at(x, y);
          ++nl;
        } else {
          dark += r.shadow.at(x, y);
          ++nd;
        }
      }
    REQUIRE(nd > 0);
    return lit / nl - dark / nd;
  };
  CHECK(gap(0) < gap(1));
}

TEST_CASE("ray-march config validation") {
  RayMarchConfig c;
  CHECK(c.steps == 256);
  CHECK(c.start_bias == 0.5);
  CHECK(c.border_sentinel == 10.0f);
  CHECK(std::isinf(c.tau));
  CHECK_NOTHROW(c.validate());
  RayMarchConfig bad = c;
  bad.steps = 1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.start_bias = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  nlohmann::json j = c;
  CHECK(j.get<RayMarchConfig>() == c);
}
