#pragma once

#include <cstdint>
#include <random>

#include "relight/scene/dataset.hpp"
#include "relight/train/config.hpp"

namespace relight::train {

/// One (view, old light, new light) draw.
struct TrainingExample {
  std::size_t view_index = 0;  // into manifest.views
  int light_old = 0;
  int light_new = 0;
  ColorImage color_old;
  ColorImage color_new;
  ShadowImage shadow_old;
  ShadowImage shadow_new;
  DepthMap depth_gt;
  DepthMap depth_corrupted;
  LightDirection l_old;   // with angular noise
  LightDirection l_new;   // exact
  CameraModel camera;
};

/// Rotates `l` by an angle drawn from N(0, sigma) about a uniformly random
/// axis perpendicular to it. sigma = 0 returns `l` unchanged.
LightDirection perturb_light(const LightDirection& l, double sigma_deg, std::mt19937_64& rng);

struct ToneParams {
  double exposure = 1.0;
  double saturation = 1.0;
  double gamma = 1.0;
};
ToneParams draw_tone(const AugmentConfig& cfg, std::mt19937_64& rng);
/// Exposure, then saturation about Rec.709 luminance, then gamma. Each step
/// is skipped when its parameter is exactly 1.
ColorImage apply_tone(const ColorImage& img, const ToneParams& p);

/// Draws a training view from `split`, two distinct lights, a fresh depth
/// corruption, tone augmentation (same for both colors) and light noise.
/// Throws ValidationError when views carry fewer than two lights.
TrainingExample sample_pair(const scene::Manifest& m, std::mt19937_64& rng, const TrainConfig& cfg,
                            scene::Split split = scene::Split::train);

}  // namespace relight::train
