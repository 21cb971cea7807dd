#include <png.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "doctest.h"
#include "relight/errors.hpp"
#include "relight/raster/camera.hpp"
#include "relight/raster/image_io.hpp"
#include "support/tempdir.hpp"

using namespace relight;
using testing_support::TempDir;

namespace {

std::vector<std::uint8_t> pfm_bytes(const std::string& header, const std::vector<float>& payload) {
  std::vector<std::uint8_t> b(header.begin(), header.end());
  const auto* p = reinterpret_cast<const std::uint8_t*>(payload.data());
  b.insert(b.end(), p, p + payload.size() * sizeof(float));
  return b;
}

// 8-bit gray PNG written straight through libpng's simplified API.
std::vector<std::uint8_t> gray_png(int w, int h, const std::vector<std::uint8_t>& px) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  REQUIRE(png_image_write_to_memory(&img, nullptr, &size, 0, px.data(), 0, nullptr));
  std::vector<std::uint8_t> out(size);
  REQUIRE(png_image_write_to_memory(&img, out.data(), &size, 0, px.data(), 0, nullptr));
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> png_gray_pixels(const std::vector<std::uint8_t>& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  REQUIRE(png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()));
  img.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(img));
  REQUIRE(png_image_finish_read(&img, nullptr, px.data(), 0, nullptr));
  return px;
}

double srgb_decode_oracle(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

}  // namespace

TEST_CASE("2x2 PFM depth round trips exactly") {
  TempDir dir("raster");
  const DepthMap d(2, 2, {1.0, 2.0, 3.0, 4.0});
  write_image(d, dir / "d.pfm", ImageFormat::pfm);
  const DepthMap back = read_depth(dir / "d.pfm");
  CHECK(back == d);
  const auto raw = read_file_bytes(dir / "d.pfm");
  CHECK(encode_pfm(decode_pfm(raw)) == raw);
}

TEST_CASE("PFM rows are stored bottom to top") {
  const auto bytes = pfm_bytes("Pf\n2 2\n-1.0\n", {3.0f, 4.0f, 1.0f, 2.0f});
  const auto r = decode_pfm(bytes);
  CHECK(r.at(0, 0) == 1.0f);
  CHECK(r.at(1, 0) == 2.0f);
  CHECK(r.at(0, 1) == 3.0f);
  CHECK(r.at(1, 1) == 4.0f);
}

TEST_CASE("negative depth is a validation error") {
  TempDir dir("raster");
  write_file_bytes(dir / "neg.pfm", pfm_bytes("Pf\n1 1\n-1.0\n", {-1.0f}));
  CHECK_THROWS_AS(read_depth(dir / "neg.pfm"), ValidationError);
  write_file_bytes(dir / "zero.pfm", pfm_bytes("Pf\n1 1\n-1.0\n", {0.0f}));
  CHECK_THROWS_AS(read_depth(dir / "zero.pfm"), ValidationError);
  CHECK_THROWS_AS(DepthMap(1, 1, {-2.0}), ValidationError);
}

TEST_CASE("malformed PFM headers report the byte offset") {
  try {
    decode_pfm(pfm_bytes("PX\n1 1\n-1.0\n", {1.0f}));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 0);
  }
  try {
    decode_pfm(pfm_bytes("Pf\n2 x\n-1.0\n", {1.0f, 1.0f}));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
    CHECK(std::string(e.what()).find("offset 5") != std::string::npos);
  }
  CHECK_THROWS_AS(decode_pfm(pfm_bytes("Pf\n2 2\n-1.0\n", {1.0f})), ParseError);
}

TEST_CASE("PNG code 188 decodes to linear 0.5029") {
  const auto png = gray_png(1, 1, {188});
  const auto r = decode_png(png);
  REQUIRE(r.channels() == 1);
  const double expect = srgb_decode_oracle(188.0 / 255.0);
  CHECK(expect == doctest::Approx(0.5029).epsilon(1e-4));
  CHECK(r.at(0, 0) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("linear 0.5029 and 1.0 encode to PNG codes 188 and 255") {
  CHECK(encode_srgb8(0.5029) == 188);
  CHECK(encode_srgb8(1.0) == 255);
  CHECK(encode_srgb8(0.0) == 0);
  CHECK(encode_srgb8(7.0) == 255);
  CHECK(encode_srgb8(-1.0) == 0);

  const ShadowImage s(2, 1, {0.5029f, 1.0f});
  const auto px = png_gray_pixels(encode_png(s.raster()));
  CHECK(px == std::vector<std::uint8_t>{188, 255});
}

TEST_CASE("sRGB encode of decode is the identity on all 8-bit codes") {
  for (int c = 0; c < 256; ++c) {
    CHECK(encode_srgb8(srgb_to_linear(c / 255.0)) == c);
    CHECK(srgb_to_linear(c / 255.0) == doctest::Approx(srgb_decode_oracle(c / 255.0)).epsilon(1e-12));
  }
}

TEST_CASE("random shadow survives a PFM round trip") {
  TempDir dir("raster");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(13 * 7);
  for (auto& x : v) x = u(rng);
  const ShadowImage s(13, 7, v);
  write_image(s, dir / "s.pfm", ImageFormat::pfm);
  CHECK(read_shadow(dir / "s.pfm").raster().storage() == v);
}

TEST_CASE("color PNG round trip stays within one code") {
  TempDir dir("raster");
  std::vector<float> v;
  for (int i = 0; i < 4 * 3 * 3; ++i) v.push_back(static_cast<float>(i) / 35.0f);
  const ColorImage c(4, 3, v);
  write_image(c, dir / "c.png", ImageFormat::png);
  const auto back = read_color(dir / "c.png");
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x)
      for (int ch = 0; ch < 3; ++ch)
        CHECK(encode_srgb8(back.at(x, y, ch)) == encode_srgb8(c.at(x, y, ch)));
}

TEST_CASE("constructors reject non-finite and out-of-range values") {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const float inf = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(ColorImage(1, 1, {0.0f, nan, 0.0f}), ValidationError);
  CHECK_THROWS_AS(ColorImage(1, 1, {0.0f, inf, 0.0f}), ValidationError);
  CHECK_THROWS_AS(ColorImage(1, 1, {0.0f, -0.1f, 0.0f}), ValidationError);
  CHECK_THROWS_AS(ShadowImage(1, 1, {nan}), ValidationError);
  CHECK_THROWS_AS(ShadowImage(1, 1, {1.5f}), ValidationError);
  CHECK_THROWS_AS(DepthMap(1, 1, {std::numeric_limits<double>::infinity()}), ValidationError);
  CHECK_THROWS_AS(DepthMap(0, 0, std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(ColorImage(2, 2, {0.0f, 0.0f, 0.0f}), ValidationError);
}

TEST_CASE("writing to an unwritable path is an IO error") {
  const ShadowImage s(1, 1, {0.5f});
  CHECK_THROWS_AS(write_image(s, "/nonexistent_dir_xyz/s.pfm", ImageFormat::pfm), IoError);
  CHECK_THROWS_AS(read_shadow("/nonexistent_dir_xyz/s.pfm"), IoError);
}

TEST_CASE("camera validation") {
  CameraModel c{4.0, 4.0, 2.0, 2.0};
  CHECK_NOTHROW(c.validate(4, 4));
  CHECK(c.principal_point_inside(4, 4));
  CameraModel outside{4.0, 4.0, 40.0, 2.0};
  CHECK_NOTHROW(outside.validate(4, 4));
  CHECK_FALSE(outside.principal_point_inside(4, 4));
  CameraModel bad{0.0, 4.0, 2.0, 2.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  nlohmann::json j = c;
  CHECK(j.get<CameraModel>() == c);
}

TEST_CASE("light directions are unit and angles round trip") {
  CHECK_THROWS_AS(LightDirection(Vec3{1.0, 1.0, 0.0}), ValidationError);
  CHECK_NOTHROW(LightDirection(Vec3{0.0, 0.0, -1.0}));
  for (double pitch : {0.0, 30.0}) {
    for (double az : {-150.0, -30.0, 0.0, 45.0, 120.0, 180.0}) {
      for (double el : {5.0, 40.0, 85.0}) {
        const auto l = LightDirection::from_angles(az, el, pitch);
        CHECK(norm(l.vec()) == doctest::Approx(1.0).epsilon(1e-12));
        const auto a = light_angles(l, pitch);
        CHECK(a.azimuth_deg == doctest::Approx(az).epsilon(1e-9));
        CHECK(a.elevation_deg == doctest::Approx(el).epsilon(1e-9));
      }
    }
  }
  // Without pitch, elevation 90 points straight up (-y in camera space).
  const auto up = LightDirection::from_angles(0.0, 90.0);
  CHECK(up.y() == doctest::Approx(-1.0));
}
