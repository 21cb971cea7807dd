#include <cmath>
#include <random>

#include "doctest.h"
#include "relight/errors.hpp"
#include "relight/geometry/geometry.hpp"

using namespace relight;
using namespace relight::geometry;

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(dot(normalize(a), normalize(b)), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

DepthMap constant_depth(int w, int h, double z) {
  return DepthMap(w, h, std::vector<double>(static_cast<std::size_t>(w) * h, z));
}

DepthMap ramp_depth(int w, int h) {
  std::vector<double> d;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) d.push_back(1.0 + 0.1 * u);
  return DepthMap(w, h, d);
}

// Closed-form normal of X(u,v) = ((u+.5) z, (v+.5) z, z) with z = 1 + 0.1 u
// (fx = fy = 1, cx = cy = 0), facing the camera.
Vec3 ramp_normal(int u, int v) {
  const double z = 1.0 + 0.1 * u;
  const Vec3 du{z + 0.1 * (u + 0.5), 0.1 * (v + 0.5), 0.1};
  const Vec3 dv{0.0, z, 0.0};
  Vec3 n = normalize(cross(du, dv));
  const Vec3 p{(u + 0.5) * z, (v + 0.5) * z, z};
  if (dot(n, p) > 0) n = -n;
  return n;
}

}  // namespace

TEST_CASE("principal-point pixel back-projects onto the optical axis") {
  const CameraModel cam{3.0, 3.0, 2.5, 1.5};
  const auto p = backproject(constant_depth(5, 3, 5.0), cam).at(2, 1);
  CHECK(p.x == 0.0);
  CHECK(p.y == 0.0);
  CHECK(p.z == 5.0);
}

TEST_CASE("corner pixel of a 4x4 unit-depth map") {
  const CameraModel cam{4.0, 4.0, 2.0, 2.0};
  const auto p = backproject(constant_depth(4, 4, 1.0), cam).at(0, 0);
  CHECK(p.x == doctest::Approx(-0.375));
  CHECK(p.y == doctest::Approx(-0.375));
  CHECK(p.z == 1.0);
}

TEST_CASE("back-projection is scale equivariant and keeps z exact") {
  const CameraModel cam{10.0, 12.0, 7.0, 5.0};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1.0, 9.0);
  std::vector<double> d(14 * 9);
  for (auto& v : d) v = u(rng);
  const DepthMap depth(14, 9, d);
  const auto a = backproject(depth, cam);
  for (double s : {2.0, 0.5, 3.7}) {
    const auto b = backproject(depth.scaled(s), cam);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 14; ++x) {
        CHECK(b.at(x, y).x == doctest::Approx(s * a.at(x, y).x).epsilon(1e-12));
        CHECK(b.at(x, y).y == doctest::Approx(s * a.at(x, y).y).epsilon(1e-12));
        CHECK(b.at(x, y).z == depth.scaled(s).at(x, y));
      }
  }
  CHECK(backproject(depth.scaled(2.0), cam).at(3, 4).x == 2.0 * a.at(3, 4).x);
}

TEST_CASE("fronto-parallel plane has normals (0,0,-1)") {
  const CameraModel cam{8.0, 8.0, 4.0, 4.0};
  const auto n = normals_from_depth(constant_depth(8, 8, 3.0), cam);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      CHECK(n.at(x, y).x == doctest::Approx(0.0).epsilon(1e-6));
      CHECK(n.at(x, y).y == doctest::Approx(0.0).epsilon(1e-6));
      CHECK(n.at(x, y).z == doctest::Approx(-1.0));
    }
}

TEST_CASE("depth ramp normals match the closed form within 2 degrees") {
  const CameraModel cam{1.0, 1.0, 0.0, 0.0};
  const auto n = normals_from_depth(ramp_depth(16, 16), cam);
  double worst = 0.0;
  for (int y = 1; y < 15; ++y)
    for (int x = 1; x < 15; ++x) worst = std::max(worst, angle_deg(n.at(x, y), ramp_normal(x, y)));
  CHECK(worst < 2.0);
}

TEST_CASE("depth noise perturbs normals") {
  const CameraModel cam{16.0, 16.0, 8.0, 8.0};
  const auto clean = ramp_depth(16, 16);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::vector<double> noisy(clean.raster().storage());
  for (auto& v : noisy) v += u(rng);
  const auto nc = normals_from_depth(clean, cam);
  const auto nn = normals_from_depth(DepthMap(16, 16, noisy), cam);
  const auto truth = normals_from_depth(ramp_depth(16, 16), cam);
  double err_clean = 0.0, err_noisy = 0.0;
  for (int y = 1; y < 15; ++y)
    for (int x = 1; x < 15; ++x) {
      err_clean += angle_deg(nc.at(x, y), truth.at(x, y));
      err_noisy += angle_deg(nn.at(x, y), truth.at(x, y));
    }
  CHECK(err_noisy > err_clean);
  CHECK(err_noisy / (14 * 14) > 1.0);
}

TEST_CASE("normals are unit, camera facing, and exactly scale invariant") {
  const CameraModel cam{20.0, 20.0, 8.0, 6.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(2.0, 4.0);
  std::vector<double> d(16 * 12);
  for (auto& v : d) v = u(rng);
  const DepthMap depth(16, 12, d);
  const auto n = normals_from_depth(depth, cam);
  const auto pos = backproject(depth, cam);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) {
      CHECK(norm(n.at(x, y)) == doctest::Approx(1.0).epsilon(1e-5));
      CHECK(dot(n.at(x, y), pos.at(x, y)) <= 0.0);
    }
  for (double s : {0.5, 3.7}) CHECK(normals_from_depth(depth.scaled(s), cam) == n);
}

TEST_CASE("Sobel gradient of a linear position ramp is constant inside") {
  Raster<double> xyz(9, 7, 3);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) {
      xyz.at(x, y, 0) = 0.3 * x - 0.1 * y + 1.0;
      xyz.at(x, y, 1) = 0.05 * x + 0.4 * y;
      xyz.at(x, y, 2) = 5.0 + 0.2 * x + 0.1 * y;
    }
  const auto n = normals_from_depth(PositionMap(xyz));
  const Vec3 ref = n.at(1, 1);
  for (int y = 1; y < 6; ++y)
    for (int x = 1; x < 8; ++x) {
      CHECK(n.at(x, y).x == doctest::Approx(ref.x).epsilon(1e-6));
      CHECK(n.at(x, y).y == doctest::Approx(ref.y).epsilon(1e-6));
      CHECK(n.at(x, y).z == doctest::Approx(ref.z).epsilon(1e-6));
    }
  // Analytic plane normal: cross of the two ramp directions.
  const Vec3 du{0.3, 0.05, 0.2}, dv{-0.1, 0.4, 0.1};
  Vec3 expect = normalize(cross(du, dv));
  if (expect.z > 0) expect = -expect;
  CHECK(angle_deg(ref, expect) < 1e-4);
}

TEST_CASE("lambert guide examples") {
  const NormalMap n(Raster<float>(1, 1, 3, std::vector<float>{0.0f, 0.0f, -1.0f}));
  CHECK(lambert_guide(n, LightDirection({0.0, 0.0, -1.0})).at(0, 0) == 1.0f);
  CHECK(lambert_guide(n, LightDirection({0.0, 0.0, 1.0})).at(0, 0) == 0.0f);
  const double r = std::sqrt(0.5);
  CHECK(lambert_guide(n, LightDirection({0.0, -r, -r})).at(0, 0) == doctest::Approx(r).epsilon(1e-6));
}

TEST_CASE("lambert guide lies in [0,1] and is zero on back-facing pixels") {
  const CameraModel cam{10.0, 10.0, 6.0, 6.0};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 3.0);
  std::vector<double> d(12 * 12);
  for (auto& v : d) v = u(rng);
  const auto n = normals_from_depth(DepthMap(12, 12, d), cam);
  const auto l = LightDirection::normalized({0.3, -0.8, -0.2});
  const auto g = lambert_guide(n, l);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) {
      CHECK(g.at(x, y) >= 0.0f);
      CHECK(g.at(x, y) <= 1.0f);
      if (dot(n.at(x, y), l.vec()) <= 0.0) CHECK(g.at(x, y) == 0.0f);
    }
}

TEST_CASE("direction map examples") {
  const CameraModel cam{4.0, 4.0, 7.5, 7.5};
  const auto psi = direction_map(cam, 16, 16);
  const Vec3 c = psi.at(7, 7);
  CHECK(c.x == doctest::Approx(0.0));
  CHECK(c.y == doctest::Approx(0.0));
  CHECK(c.z == doctest::Approx(1.0));
  const Vec3 r = psi.at(11, 7);
  CHECK(r.x == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(r.y == doctest::Approx(0.0));
  CHECK(r.z == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) CHECK(norm(psi.at(x, y)) == doctest::Approx(1.0).epsilon(1e-6));
  // Consistent with back-projection at depth 1.
  const auto p = backproject(constant_depth(16, 16, 1.0), cam).at(2, 13);
  CHECK(angle_deg(psi.at(2, 13), p) < 1e-4);
}

TEST_CASE("2D features are RGB then the exact lambert guide") {
  const CameraModel cam{8.0, 8.0, 4.0, 4.0};
  const auto n = normals_from_depth(ramp_depth(8, 8), cam);
  const auto l = LightDirection::normalized({0.2, -0.9, -0.3});
  std::vector<float> rgb;
  for (int i = 0; i < 64; ++i) {
    rgb.push_back(0.1f);
    rgb.push_back(0.2f);
    rgb.push_back(0.3f);
  }
  const ColorImage img(8, 8, rgb);
  const auto f = two_d_features(img, n, l);
  const auto g = lambert_guide(n, l);
  REQUIRE(f.channels() == 4);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      CHECK(f.at(x, y, 0) == 0.1f);
      CHECK(f.at(x, y, 1) == 0.2f);
      CHECK(f.at(x, y, 2) == 0.3f);
      CHECK(f.at(x, y, 3) == g.at(x, y));
    }

  const NormalMap flat(Raster<float>(2, 2, 3, std::vector<float>{0, 0, -1, 0, 0, -1, 0, 0, -1, 0, 0, -1}));
  const auto b = two_d_features(ColorImage(2, 2, std::vector<float>(12, 0.0f)), flat, LightDirection({0.0, 0.0, -1.0}));
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) {
      CHECK(b.at(x, y, 0) == 0.0f);
      CHECK(b.at(x, y, 3) == 1.0f);
    }
  CHECK_THROWS_AS(two_d_features(ColorImage(3, 2, std::vector<float>(18, 0.0f)), flat, LightDirection({0.0, 0.0, -1.0})),
                  ValidationError);
}
