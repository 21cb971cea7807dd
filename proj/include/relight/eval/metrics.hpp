#pragma once

#include "relight/raster/image.hpp"

namespace relight::eval {

/// Mean squared difference over all pixels and channels.
double mse(const Raster<float>& a, const Raster<float>& b);
double mse(const ColorImage& a, const ColorImage& b);
double mse(const ShadowImage& a, const ShadowImage& b);

/// Mean SSIM over window positions fully inside the image (11x11 Gaussian,
/// sigma 1.5, k1 0.01, k2 0.03, dynamic range 1), averaged over channels.
double ssim(const Raster<float>& a, const Raster<float>& b);
/// (1 - SSIM) / 2.
double dssim(const Raster<float>& a, const Raster<float>& b);
double dssim(const ColorImage& a, const ColorImage& b);

/// Intersection over union of two binary masks (value > 0.5 is set).
/// Both empty -> 1.
double iou(const Raster<float>& a, const Raster<float>& b);

/// Pixels where the shadow image is exactly zero (unlit: occluded or facing away).
Raster<float> unlit_mask(const ShadowImage& s);

}  // namespace relight::eval
