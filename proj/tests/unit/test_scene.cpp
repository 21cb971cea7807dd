#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "doctest.h"
#include "relight/errors.hpp"
#include "relight/geometry/geometry.hpp"
#include "relight/raster/image_io.hpp"
#include "relight/scene/corrupt.hpp"
#include "relight/scene/dataset.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

using namespace relight;
using namespace relight::scene;
using testing_support::TempDir;

namespace {

// World position of pixel (x, y) from the rendered depth.
Vec3 world_point(const SceneSpec& s, const RenderedSample& r, int x, int y) {
  const CameraFrame frame(s.camera.pose);
  const Vec3 c = s.camera.intrinsics.ray_at(x + 0.5, y + 0.5) * r.depth.at(x, y);
  return frame.origin() + frame.dir_to_world(c);
}

// Furthest extent of ground shadow along -x (sun toward +x).
double shadow_reach_neg_x(const SceneSpec& s, const RenderedSample& r) {
  double reach = 0.0;
  for (int y = 0; y < r.hit.height(); ++y)
    for (int x = 0; x < r.hit.width(); ++x) {
      if (r.hit.at(x, y) == 0.0f || r.visibility.at(x, y) != 0.0f) continue;
      const Vec3 p = world_point(s, r, x, y);
      if (std::abs(p.y) > 1e-6) continue;
      reach = std::min(reach, p.x);
    }
  return reach;
}

SceneSpec unit_box_scene(double elevation) {
  auto s = fixtures::ground_scene(128, 60.0, 7.0);
  s.primitives.push_back(fixtures::box({1.0, 1.0, 1.0}));
  s.lights = {{90.0, elevation}};
  return s;
}

std::map<std::string, std::vector<std::uint8_t>> tree_bytes(const std::filesystem::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    out[std::filesystem::relative(e.path(), root).string()] = read_file_bytes(e.path());
  }
  return out;
}

double mean_normal_error_deg(const DepthMap& d, const CameraModel& cam) {
  const auto n = geometry::normals_from_depth(d, cam);
  double sum = 0.0;
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) sum += std::acos(std::clamp(-n.at(x, y).z, -1.0, 1.0));
  return sum / (d.width() * d.height()) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("closed-form intersections") {
  Primitive b = fixtures::box({1.0, 1.0, 1.0});
  const auto hb = intersect(b, {0.0, 0.5, -5.0}, {0.0, 0.0, 1.0}, 1e-9, 1e9);
  REQUIRE(hb);
  CHECK(hb->t == doctest::Approx(4.5));
  CHECK(hb->normal.z == doctest::Approx(-1.0));

  const Primitive c = fixtures::cylinder(1.0, 2.0);
  const auto hc = intersect(c, {-5.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, 1e-9, 1e9);
  REQUIRE(hc);
  CHECK(hc->t == doctest::Approx(4.0));
  CHECK(hc->normal.x == doctest::Approx(-1.0));
  // Over the top of the cylinder.
  CHECK_FALSE(intersect(c, {-5.0, 2.5, 0.0}, {1.0, 0.0, 0.0}, 1e-9, 1e9));
  // Down onto the cap.
  const auto cap = intersect(c, {0.2, 5.0, 0.1}, {0.0, -1.0, 0.0}, 1e-9, 1e9);
  REQUIRE(cap);
  CHECK(cap->t == doctest::Approx(3.0));
  CHECK(cap->normal.y == doctest::Approx(1.0));

  Primitive g;
  g.kind = PrimitiveKind::ground;
  const double r = std::sqrt(0.5);
  const auto hg = intersect(g, {0.0, 2.0, 0.0}, {0.0, -r, r}, 1e-9, 1e9);
  REQUIRE(hg);
  CHECK(hg->t == doctest::Approx(2.0 / r));
  CHECK(hg->normal.y == 1.0);
}

TEST_CASE("plane under a zenith sun has no cast shadow") {
  auto s = fixtures::ground_scene();
  s.lights = {{0.0, 90.0}};
  const auto r = render(s, 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      CHECK(r.visibility.at(x, y) == 1.0f);
      CHECK(r.shadow.at(x, y) == r.cosine.at(x, y));
      CHECK(r.cosine.at(x, y) == doctest::Approx(1.0f));
    }
}

TEST_CASE("unit box shadow length is height over tan(elevation)") {
  // One ground pixel spans roughly 0.06 world units here.
  for (double el : {45.0, 30.0}) {
    const auto s = unit_box_scene(el);
    const auto r = render(s, 0);
    const double expect = -0.5 - 1.0 / std::tan(el * M_PI / 180.0);
    CHECK(shadow_reach_neg_x(s, r) == doctest::Approx(expect).epsilon(0.1 / std::abs(expect)));
  }
}

TEST_CASE("a lower sun casts a strictly longer shadow") {
  const auto hi = unit_box_scene(50.0);
  const auto lo = unit_box_scene(35.0);
  CHECK(shadow_reach_neg_x(lo, render(lo, 0)) < shadow_reach_neg_x(hi, render(hi, 0)));
}

TEST_CASE("shadow is visibility times cosine and never exceeds the cosine") {
  SceneSamplerConfig cfg;
  for (int id = 0; id < 3; ++id) {
    const auto s = sample_scene(cfg, 11, id, 0, 2);
    for (int k = 0; k < 2; ++k) {
      const auto r = render(s, k);
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
          const float v = r.visibility.at(x, y);
          CHECK((v == 0.0f || v == 1.0f));
          CHECK(r.shadow.at(x, y) <= r.cosine.at(x, y));
          if (r.hit.at(x, y) != 0.0f) CHECK(r.shadow.at(x, y) == v * r.cosine.at(x, y));
        }
    }
  }
}

TEST_CASE("with zero ambient, color is zero exactly where the shadow is") {
  SceneSamplerConfig cfg;
  auto s = sample_scene(cfg, 5, 2, 1, 1);
  s.ambient = 0.0;
  const auto r = render(s, 0);
  int dark = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      if (r.hit.at(x, y) == 0.0f) continue;
      const bool black = r.color.at(x, y, 0) == 0.0f && r.color.at(x, y, 1) == 0.0f && r.color.at(x, y, 2) == 0.0f;
      CHECK(black == (r.shadow.at(x, y) == 0.0f));
      dark += black;
    }
  CHECK(dark > 0);
}

TEST_CASE("culling drops hidden primitives and their shadows") {
  auto s = fixtures::ground_scene();
  const auto behind = fixtures::box({1.0, 1.0, 1.0}, {0.0, 0.0, -30.0});
  const auto edge = fixtures::box({2.0, 1.0, 2.0}, {-6.5, 0.0, 0.0});
  const auto wall = fixtures::box({0.5, 6.0, 6.0}, {14.0, 0.0, 2.0});
  s.primitives.push_back(behind);
  s.primitives.push_back(edge);
  s.primitives.push_back(wall);
  s.lights = {{90.0, 25.0}};
  CHECK_FALSE(covers_pixels(s, behind));
  CHECK(covers_pixels(s, edge));
  REQUIRE_FALSE(covers_pixels(s, wall));

  const auto culled = cull_offscreen(s);
  REQUIRE(culled.primitives.size() == 2);
  CHECK(culled.primitives[0].kind == PrimitiveKind::ground);
  CHECK(culled.primitives[1].center == edge.center);

  // The off-screen wall shadows part of the view before culling only.
  auto no_edge = s;
  no_edge.primitives.erase(no_edge.primitives.begin() + 2);
  const auto before = render(no_edge, 0);
  auto after_spec = cull_offscreen(no_edge);
  const auto after = render(after_spec, 0);
  int occluded_before = 0, occluded_after = 0;
  for (float v : before.visibility.storage()) occluded_before += v == 0.0f;
  for (float v : after.visibility.storage()) occluded_after += v == 0.0f;
  CHECK(occluded_before > 100);
  CHECK(occluded_after == 0);
}

TEST_CASE("scene specs round trip through JSON and replay from the seed") {
  SceneSamplerConfig cfg;
  const auto a = sample_scene(cfg, 3, 4, 2, 4);
  const auto b = sample_scene(cfg, 3, 4, 2, 4);
  CHECK(nlohmann::json(a) == nlohmann::json(b));
  const auto back = nlohmann::json(a).get<SceneSpec>();
  CHECK(nlohmann::json(back) == nlohmann::json(a));
  CHECK(render(back, 1).color == render(a, 1).color);
  CHECK(nlohmann::json(sample_scene(cfg, 3, 5, 2, 4)) != nlohmann::json(a));
  CHECK(nlohmann::json(sample_scene(cfg, 4, 4, 2, 4)) != nlohmann::json(a));
}

TEST_CASE("sampled scenes keep every pixel on geometry") {
  SceneSamplerConfig cfg;
  for (int id = 0; id < 6; ++id) {
    const auto r = render(sample_scene(cfg, 9, id, id % 3, 1), 0);
    for (float h : r.hit.storage()) CHECK(h == 1.0f);
  }
}

TEST_CASE("zero corruption amplitudes are the identity") {
  const auto v = fixtures::thick_cylinder();
  CorruptionConfig zero;
  zero.warp_amplitude = 0.0;
  zero.bump_amplitude = 0.0;
  zero.texture_amplitude = 0.0;
  CHECK(corrupt_depth(v.sample.depth, 17, zero, &v.sample.color) == v.sample.depth);
}

TEST_CASE("corruption is scale equivariant, seeded and bounded per mode") {
  const auto v = fixtures::thick_cylinder();
  const DepthMap& d = v.sample.depth;
  const auto c = corrupt_depth(d, 17, {}, &v.sample.color);
  for (double s : {0.5, 3.7}) {
    const auto cs = corrupt_depth(d.scaled(s), 17, {}, &v.sample.color);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) CHECK(cs.at(x, y) == doctest::Approx(s * c.at(x, y)).epsilon(1e-12));
  }
  CHECK(corrupt_depth(d, 17, {}, &v.sample.color) == c);
  CHECK_FALSE(corrupt_depth(d, 18, {}, &v.sample.color) == c);

  auto only = [](double warp, double bump, double tex) {
    CorruptionConfig k;
    k.warp_amplitude = warp;
    k.bump_amplitude = bump;
    k.texture_amplitude = tex;
    return k;
  };
  const auto warp = corrupt_depth(d, 3, only(0.05, 0.0, 0.0));
  const auto bump = corrupt_depth(d, 3, only(0.0, 0.02, 0.0));
  const auto tex = corrupt_depth(d, 3, only(0.0, 0.0, 0.02), &v.sample.color);
  double wmax = 0.0, bmax = 0.0, tmin = 1.0, tmax = 0.0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const double base = d.at(x, y);
      wmax = std::max(wmax, std::abs(warp.at(x, y) / base - 1.0));
      bmax = std::max(bmax, std::abs(bump.at(x, y) / base - 1.0));
      tmin = std::min(tmin, tex.at(x, y) / base);
      tmax = std::max(tmax, tex.at(x, y) / base);
      CHECK(c.at(x, y) > 0.0);
    }
  CHECK(wmax <= 0.05 + 1e-12);
  CHECK(wmax > 0.0);
  CHECK(bmax <= 0.02 + 1e-12);
  CHECK(bmax > 0.0);
  CHECK(tmin >= 1.0 - 1e-12);
  CHECK(tmax <= 1.02 + 1e-12);
  CHECK(tmax > 1.0);
  auto small_spec = fixtures::ground_scene(32);
  small_spec.lights = {{0.0, 45.0}};
  const auto small = fixtures::render_view(small_spec);
  CHECK_THROWS_AS(corrupt_depth(d, 3, {}, &small.sample.color), ValidationError);
}

TEST_CASE("corrupted flat plane produces tilted normals") {
  const CameraModel cam{60.0, 60.0, 32.0, 32.0};
  const DepthMap flat(64, 64, std::vector<double>(64 * 64, 5.0));
  CHECK(mean_normal_error_deg(flat, cam) < 1e-6);
  const double err = mean_normal_error_deg(corrupt_depth(flat, 21), cam);
  MESSAGE("mean normal deviation on the corrupted plane " << err << " deg");
  CHECK(err > 0.0);
}

TEST_CASE("make_dataset counts, determinism and sun range") {
  TempDir dir("scene");
  DatasetConfig cfg;
  cfg.scenes = 2;
  cfg.val_scenes = 0;
  cfg.test_scenes = 1;
  cfg.views = 1;
  cfg.lights = 4;
  cfg.seed = 5;
  const auto m = make_dataset(cfg, dir / "a");
  CHECK(m.light_count() == 8);
  CHECK(m.split(Split::train).size() == 1);
  CHECK(m.split(Split::test).size() == 1);
  for (const auto& v : m.views) {
    CHECK(std::filesystem::exists(dir / "a" / v.depth));
    CHECK(std::filesystem::exists(dir / "a" / v.spec));
    for (const auto& l : v.lights) {
      CHECK(std::filesystem::exists(dir / "a" / l.color));
      CHECK(std::filesystem::exists(dir / "a" / l.shadow));
    }
  }
  make_dataset(cfg, dir / "b");
  CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));

  const auto loaded = load_manifest(dir / "a");
  CHECK(manifest_to_json(loaded) == manifest_to_json(m));
  const auto imgs = load_view(loaded, loaded.views[0]);
  CHECK(imgs.colors.size() == 4);
  CHECK(imgs.shadows.size() == 4);

  DatasetConfig wide = cfg;
  wide.scenes = 6;
  wide.views = 2;
  wide.test_scenes = 0;
  const auto mw = make_dataset(wide, dir / "c");
  for (const auto& v : mw.views)
    for (const auto& l : v.lights) {
      CHECK(l.world_elevation_deg >= 10.0);
      CHECK(l.world_elevation_deg <= 80.0);
      CHECK(l.level_elevation_deg > 0.0);
    }

  DatasetConfig bad = cfg;
  bad.test_scenes = 3;
  CHECK_THROWS_AS(make_dataset(bad, dir / "d"), ValidationError);
  CHECK_THROWS_AS(make_dataset(cfg, "/proc/forbidden_dataset_dir"), IoError);
}
