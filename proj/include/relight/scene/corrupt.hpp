#pragma once

#include <cstdint>

#include "json.hpp"
#include "relight/raster/image.hpp"

namespace relight::scene {

/// Surrogate for monocular depth error. Every mode is a multiplicative
/// factor, so corrupt(s*D) = s*corrupt(D).
struct CorruptionConfig {
  double warp_amplitude = 0.05;    // smooth low-frequency field, |f-1| <= amplitude
  int warp_cells = 3;              // coarse grid cells per image side
  double bump_amplitude = 0.02;    // smoothed per-pixel noise, |f-1| <= amplitude
  double bump_sigma = 1.0;         // Gaussian smoothing in pixels
  double texture_amplitude = 0.02; // luminance-gradient copy, f in [1, 1+amplitude]
};

void to_json(nlohmann::json& j, const CorruptionConfig& c);
void from_json(const nlohmann::json& j, CorruptionConfig& c);

/// `color` enables texture copying; pass nullptr to skip that mode.
DepthMap corrupt_depth(const DepthMap& depth, std::uint64_t seed, const CorruptionConfig& cfg = {},
                       const ColorImage* color = nullptr);

}  // namespace relight::scene
