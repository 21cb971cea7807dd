#include "relight/train/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace relight::train {

LightDirection perturb_light(const LightDirection& l, double sigma_deg, std::mt19937_64& rng) {
  if (sigma_deg == 0.0) return l;
  const Vec3 v = l.vec();
  const Vec3 helper = std::abs(v.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 a = normalize(cross(v, helper));
  const Vec3 b = cross(v, a);
  std::uniform_real_distribution<double> phi_d(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> ang_d(0.0, sigma_deg * std::numbers::pi / 180.0);
  const double phi = phi_d(rng);
  const double ang = ang_d(rng);
  const Vec3 axis = a * std::cos(phi) + b * std::sin(phi);
  // v is perpendicular to the axis, so Rodrigues reduces to two terms.
  return LightDirection::normalized(v * std::cos(ang) + cross(axis, v) * std::sin(ang));
}

ToneParams draw_tone(const AugmentConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ToneParams p;
  const double e = u(rng), s = u(rng), g = u(rng);
  if (cfg.exposure_stops != 0.0) p.exposure = std::exp2(e * cfg.exposure_stops);
  if (cfg.saturation != 0.0) p.saturation = 1.0 + s * cfg.saturation;
  if (cfg.gamma != 0.0) p.gamma = 1.0 + g * cfg.gamma;
  return p;
}

ColorImage apply_tone(const ColorImage& img, const ToneParams& p) {
  Raster<float> r = img.raster();
  if (p.exposure != 1.0) {
    for (float& v : r.data()) v = static_cast<float>(v * p.exposure);
  }
  if (p.saturation != 1.0) {
    for (int y = 0; y < r.height(); ++y) {
      for (int x = 0; x < r.width(); ++x) {
        const double lum = 0.2126 * r.at(x, y, 0) + 0.7152 * r.at(x, y, 1) + 0.0722 * r.at(x, y, 2);
        for (int c = 0; c < 3; ++c) {
          const double v = lum + p.saturation * (r.at(x, y, c) - lum);
          r.at(x, y, c) = static_cast<float>(std::max(0.0, v));
        }
      }
    }
  }
  if (p.gamma != 1.0) {
    for (float& v : r.data()) v = static_cast<float>(std::pow(static_cast<double>(v), p.gamma));
  }
  return ColorImage(std::move(r));
}

TrainingExample sample_pair(const scene::Manifest& m, std::mt19937_64& rng, const TrainConfig& cfg,
                            scene::Split split) {
  const auto views = m.split(split);
  if (views.empty()) throw ValidationError(std::string("no views in split ") + scene::split_name(split));
  std::uniform_int_distribution<std::size_t> vd(0, views.size() - 1);
  const scene::ViewEntry& v = *views[vd(rng)];
  const int n = static_cast<int>(v.lights.size());
  if (n < 2) {
    throw ValidationError("view s" + std::to_string(v.scene) + " v" + std::to_string(v.view) +
                          " has " + std::to_string(n) + " light(s); pairs need at least 2");
  }
  std::uniform_int_distribution<int> ld(0, n - 1);
  std::uniform_int_distribution<int> ld2(0, n - 2);
  const int lo = ld(rng);
  int ln = ld2(rng);
  if (ln >= lo) ++ln;

  const std::uint64_t corruption_seed = rng();
  const ToneParams tone = draw_tone(cfg.augment, rng);
  const LightDirection l_old = perturb_light(v.lights[static_cast<std::size_t>(lo)].direction,
                                             cfg.light_noise_deg, rng);

  scene::ViewImages img = scene::load_view(m, v);
  const auto& colors = img.colors;
  const auto idx = static_cast<std::size_t>(&v - m.views.data());
  DepthMap corrupted = scene::corrupt_depth(img.depth, corruption_seed, cfg.corruption,
                                            &colors[static_cast<std::size_t>(lo)]);
  return TrainingExample{idx,
                         lo,
                         ln,
                         apply_tone(colors[static_cast<std::size_t>(lo)], tone),
                         apply_tone(colors[static_cast<std::size_t>(ln)], tone),
                         img.shadows[static_cast<std::size_t>(lo)],
                         img.shadows[static_cast<std::size_t>(ln)],
                         std::move(img.depth),
                         std::move(corrupted),
                         l_old,
                         v.lights[static_cast<std::size_t>(ln)].direction,
                         v.camera};
}

}  // namespace relight::train
