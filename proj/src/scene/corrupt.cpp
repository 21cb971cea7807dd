#include "relight/scene/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace relight::scene {

namespace {

using Field = std::vector<double>;

double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

Field warp_field(int w, int h, int cells, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int g = cells + 1;
  Field grid(static_cast<std::size_t>(g * g));
  for (double& v : grid) v = uni(rng);
  Field out(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y) {
    const double gy = (y + 0.5) / h * cells;
    const int y0 = std::min(static_cast<int>(gy), cells - 1);
    const double fy = gy - y0;
    for (int x = 0; x < w; ++x) {
      const double gx = (x + 0.5) / w * cells;
      const int x0 = std::min(static_cast<int>(gx), cells - 1);
      const double fx = gx - x0;
      auto at = [&](int i, int j) { return grid[static_cast<std::size_t>(j * g + i)]; };
      out[static_cast<std::size_t>(y * w + x)] =
          (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
          fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
    }
  }
  return out;
}

Field gaussian_blur(const Field& in, int w, int h, double sigma) {
  if (sigma <= 0.0) return in;
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + r)];
  }
  for (double& v : k) v /= sum;
  Field tmp(in.size());
  Field out(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int xx = std::clamp(x + i, 0, w - 1);
        acc += k[static_cast<std::size_t>(i + r)] * in[static_cast<std::size_t>(y * w + xx)];
      }
      tmp[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int yy = std::clamp(y + i, 0, h - 1);
        acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(yy * w + x)];
      }
      out[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  return out;
}

Field luminance_gradient(const ColorImage& img) {
  const int w = img.width();
  const int h = img.height();
  Field lum(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      lum[static_cast<std::size_t>(y * w + x)] =
          0.2126 * img.at(x, y, 0) + 0.7152 * img.at(x, y, 1) + 0.0722 * img.at(x, y, 2);
    }
  }
  auto l = [&](int x, int y) {
    return lum[static_cast<std::size_t>(std::clamp(y, 0, h - 1) * w + std::clamp(x, 0, w - 1))];
  };
  Field g(lum.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (l(x + 1, y - 1) + 2 * l(x + 1, y) + l(x + 1, y + 1)) -
                        (l(x - 1, y - 1) + 2 * l(x - 1, y) + l(x - 1, y + 1));
      const double gy = (l(x - 1, y + 1) + 2 * l(x, y + 1) + l(x + 1, y + 1)) -
                        (l(x - 1, y - 1) + 2 * l(x, y - 1) + l(x + 1, y - 1));
      g[static_cast<std::size_t>(y * w + x)] = std::hypot(gx, gy) / 8.0;
    }
  }
  return g;
}

}  // namespace

void to_json(nlohmann::json& j, const CorruptionConfig& c) {
  j = nlohmann::json{{"warp_amplitude", c.warp_amplitude},
                     {"warp_cells", c.warp_cells},
                     {"bump_amplitude", c.bump_amplitude},
                     {"bump_sigma", c.bump_sigma},
                     {"texture_amplitude", c.texture_amplitude}};
}

void from_json(const nlohmann::json& j, CorruptionConfig& c) {
  c.warp_amplitude = j.value("warp_amplitude", c.warp_amplitude);
  c.warp_cells = j.value("warp_cells", c.warp_cells);
  c.bump_amplitude = j.value("bump_amplitude", c.bump_amplitude);
  c.bump_sigma = j.value("bump_sigma", c.bump_sigma);
  c.texture_amplitude = j.value("texture_amplitude", c.texture_amplitude);
}

DepthMap corrupt_depth(const DepthMap& depth, std::uint64_t seed, const CorruptionConfig& cfg,
                       const ColorImage* color) {
  const int w = depth.width();
  const int h = depth.height();
  const std::size_t n = static_cast<std::size_t>(w * h);
  if (color && (color->width() != w || color->height() != h)) {
    throw ValidationError("corrupt_depth: color " + shape_string(color->width(), color->height(), 3) +
                          " vs depth " + shape_string(w, h, 1));
  }
  std::mt19937_64 rng(seed);
  Field factor(n, 1.0);

  if (cfg.warp_amplitude > 0.0) {
    const Field f = warp_field(w, h, std::max(1, cfg.warp_cells), rng);
    for (std::size_t i = 0; i < n; ++i) factor[i] *= 1.0 + cfg.warp_amplitude * f[i];
  }
  if (cfg.bump_amplitude > 0.0) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Field noise(n);
    for (double& v : noise) v = uni(rng);
    Field b = gaussian_blur(noise, w, h, cfg.bump_sigma);
    const double m = max_abs(b);
    if (m > 0.0) {
      for (std::size_t i = 0; i < n; ++i) factor[i] *= 1.0 + cfg.bump_amplitude * b[i] / m;
    }
  }
  if (cfg.texture_amplitude > 0.0 && color) {
    const Field g = luminance_gradient(*color);
    const double m = max_abs(g);
    if (m > 0.0) {
      for (std::size_t i = 0; i < n; ++i) factor[i] *= 1.0 + cfg.texture_amplitude * g[i] / m;
    }
  }

  Raster<double> out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = depth.at(x, y) * factor[static_cast<std::size_t>(y * w + x)];
    }
  }
  return DepthMap(std::move(out));
}

}  // namespace relight::scene
