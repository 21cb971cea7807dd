#include "relight/raymarch/raymarch.hpp"

#include <algorithm>
#include <cmath>

namespace relight::raymarch {

void RayMarchConfig::validate() const {
  if (steps < 2) throw ValidationError("ray march needs at least 2 steps");
  if (!(start_bias >= 0.0 && start_bias < 1.0)) {
    throw ValidationError("start_bias must lie in [0, 1)");
  }
  if (!(tau > 0.0)) throw ValidationError("tau must be positive or infinite");
  if (!std::isfinite(border_sentinel)) throw ValidationError("border sentinel must be finite");
}

void to_json(nlohmann::json& j, const RayMarchConfig& c) {
  j = nlohmann::json{{"steps", c.steps},
                     {"start_bias", c.start_bias},
                     {"tau", std::isinf(c.tau) ? nlohmann::json("inf") : nlohmann::json(c.tau)},
                     {"border_sentinel", c.border_sentinel}};
}

void from_json(const nlohmann::json& j, RayMarchConfig& c) {
  c.steps = j.value("steps", c.steps);
  c.start_bias = j.value("start_bias", c.start_bias);
  if (j.contains("tau")) {
    const auto& t = j.at("tau");
    c.tau = t.is_string() ? std::numeric_limits<double>::infinity() : t.get<double>();
  }
  c.border_sentinel = j.value("border_sentinel", c.border_sentinel);
  c.validate();
}

EpipolarVolume::EpipolarVolume(int width, int height, int steps)
    : w_(width), h_(height), z_(steps) {
  if (width <= 0 || height <= 0 || steps <= 0) {
    throw ValidationError("volume dims must be positive");
  }
  data_.assign(static_cast<std::size_t>(kChannels) * z_ * h_ * w_, 0.0f);
  mask_.assign(static_cast<std::size_t>(z_) * h_ * w_, 0);
}

ScreenDir project_light_dir(const LightDirection& l, const CameraModel& cam, double px, double py) {
  const Vec3 r = cam.ray_at(px, py);
  const double dx = cam.fx * (l.x() - r.x * l.z());
  const double dy = cam.fy * (l.y() - r.y * l.z());
  const double n = std::hypot(dx, dy);
  if (!(n > 1e-9 * std::max(cam.fx, cam.fy))) {
    throw DegenerateProjection("light ray projects to a point at (" + std::to_string(px) + ", " +
                               std::to_string(py) + ")");
  }
  return {dx / n, dy / n};
}

namespace {

double border_distance(double px, double py, const ScreenDir& d, int w, int h) {
  double t = std::numeric_limits<double>::infinity();
  if (d.x > 0.0) t = std::min(t, (w - px) / d.x);
  if (d.x < 0.0) t = std::min(t, -px / d.x);
  if (d.y > 0.0) t = std::min(t, (h - py) / d.y);
  if (d.y < 0.0) t = std::min(t, -py / d.y);
  return t;
}

struct Bilinear {
  int x0, x1, y0, y1;
  double wx, wy;
};

Bilinear bilinear_taps(double sx, double sy, int w, int h) {
  const double fx = sx - 0.5;
  const double fy = sy - 0.5;
  const double flx = std::floor(fx);
  const double fly = std::floor(fy);
  const int x0 = static_cast<int>(flx);
  const int y0 = static_cast<int>(fly);
  return {std::clamp(x0, 0, w - 1), std::clamp(x0 + 1, 0, w - 1), std::clamp(y0, 0, h - 1),
          std::clamp(y0 + 1, 0, h - 1), fx - flx, fy - fly};
}

template <typename R>
double sample(const R& r, const Bilinear& b, int c) {
  const double a = (1.0 - b.wx) * r.at(b.x0, b.y0, c) + b.wx * r.at(b.x1, b.y0, c);
  const double e = (1.0 - b.wx) * r.at(b.x0, b.y1, c) + b.wx * r.at(b.x1, b.y1, c);
  return (1.0 - b.wy) * a + b.wy * e;
}

}  // namespace

EpipolarVolume march_ratios(const DepthMap& depth, const ColorImage& img, const LightDirection& l,
                            const CameraModel& cam, const RayMarchConfig& cfg) {
  cfg.validate();
  cam.validate();
  const int w = depth.width();
  const int h = depth.height();
  if (img.width() != w || img.height() != h) {
    throw ValidationError("march_ratios: depth " + shape_string(w, h, 1) + " vs color " +
                          shape_string(img.width(), img.height(), 3));
  }
  const int z = cfg.steps;
  EpipolarVolume vol(w, h, z);
  const Raster<double>& dr = depth.raster();
  const Raster<float>& cr = img.raster();

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      for (int k = 0; k < z; ++k) vol.at(EpipolarVolume::kRatio, k, x, y) = cfg.border_sentinel;
      ScreenDir d;
      try {
        d = project_light_dir(l, cam, px, py);
      } catch (const DegenerateProjection&) {
        continue;
      }
      const Vec3 r = cam.ray_at(px, py);
      const double dp = dr.at(x, y);
      const double step = border_distance(px, py, d, w, h) / z;
      const bool use_x = std::abs(d.x) >= std::abs(d.y);
      for (int k = 0; k < z; ++k) {
        const double dist = (k + cfg.start_bias) * step;
        const double sx = px + dist * d.x;
        const double sy = py + dist * d.y;
        // Beyond the outermost pixel centers bilinear taps would be clamped.
        if (!(sx >= 0.5 && sx <= w - 0.5 && sy >= 0.5 && sy <= h - 0.5)) continue;
        // Ray parameter per unit depth at which X(p) + t*l projects onto s.
        double tn;
        if (use_x) {
          const double a = (sx - cam.cx) / cam.fx;
          tn = (a - r.x) / (l.x() - a * l.z());
        } else {
          const double b = (sy - cam.cy) / cam.fy;
          tn = (b - r.y) / (l.y() - b * l.z());
        }
        const double zf = 1.0 + tn * l.z();
        if (!(tn > 0.0) || !std::isfinite(tn) || !(zf > 0.0)) continue;
        const Bilinear b = bilinear_taps(sx, sy, w, h);
        const double dmap = sample(dr, b, 0);
        vol.at(EpipolarVolume::kRatio, k, x, y) = static_cast<float>(dmap / (dp * zf));
        for (int c = 0; c < 3; ++c) vol.at(c, k, x, y) = static_cast<float>(sample(cr, b, c));
        vol.set_valid(k, x, y, true);
      }
    }
  }
  return vol;
}

Raster<float> direct_occlusion(const EpipolarVolume& vol, double tau) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive or infinite");
  const double lo = std::isinf(tau) ? 0.0 : 1.0 / (1.0 + tau);
  Raster<float> occ(vol.width(), vol.height(), 1);
  for (int y = 0; y < vol.height(); ++y) {
    for (int x = 0; x < vol.width(); ++x) {
      for (int k = 0; k < vol.steps(); ++k) {
        if (!vol.valid(k, x, y)) continue;
        const double r = vol.ratio(k, x, y);
        if (r <= 1.0 && r >= lo) {
          occ.at(x, y) = 1.0f;
          break;
        }
      }
    }
  }
  return occ;
}

ShadowImage direct_shadow(const EpipolarVolume& vol, const ShadowImage& lambert,
                          const RayMarchConfig& cfg) {
  Raster<float> vis = direct_occlusion(vol, cfg.tau);
  for (float& v : vis.data()) v = 1.0f - v;
  return shadow_image_from_visibility(vis, lambert);
}

ShadowImage shadow_image_from_visibility(const Raster<float>& vis, const ShadowImage& lambert) {
  if (vis.channels() != 1 || !vis.same_size(lambert.width(), lambert.height())) {
    throw ValidationError("visibility " + shape_string(vis.width(), vis.height(), vis.channels()) +
                          " vs lambert " + shape_string(lambert.width(), lambert.height(), 1));
  }
  Raster<float> out(vis.width(), vis.height(), 1);
  for (int y = 0; y < vis.height(); ++y) {
    for (int x = 0; x < vis.width(); ++x) {
      const float v = vis.at(x, y);
      if (v != 0.0f && v != 1.0f) throw ValidationError("visibility must be 0 or 1");
      out.at(x, y) = v * lambert.at(x, y);
    }
  }
  return ShadowImage(std::move(out));
}

}  // namespace relight::raymarch
