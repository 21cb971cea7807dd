#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "json.hpp"
#include "relight/errors.hpp"
#include "relight/raster/camera.hpp"
#include "relight/raster/image.hpp"

namespace relight::raymarch {

struct RayMarchConfig {
  int steps = 256;
  double start_bias = 0.5;  // fraction of one step skipped before the first sample
  double tau = std::numeric_limits<double>::infinity();
  float border_sentinel = 10.0f;

  void validate() const;
  bool operator==(const RayMarchConfig&) const = default;
};

void to_json(nlohmann::json& j, const RayMarchConfig& c);
void from_json(const nlohmann::json& j, RayMarchConfig& c);

/// Per-pixel samples along the screen projection of the light ray.
/// Planar layout: channel-major [4][Z][H][W] with channels R, G, B, ratio,
/// plus a [Z][H][W] validity mask.
class EpipolarVolume {
 public:
  static constexpr int kChannels = 4;
  static constexpr int kRatio = 3;

  EpipolarVolume(int width, int height, int steps);

  int width() const { return w_; }
  int height() const { return h_; }
  int steps() const { return z_; }

  float& at(int c, int k, int x, int y) { return data_[index(c, k, x, y)]; }
  float at(int c, int k, int x, int y) const { return data_[index(c, k, x, y)]; }
  float ratio(int k, int x, int y) const { return at(kRatio, k, x, y); }
  bool valid(int k, int x, int y) const { return mask_[mask_index(k, x, y)] != 0; }
  void set_valid(int k, int x, int y, bool v) { mask_[mask_index(k, x, y)] = v ? 1 : 0; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  std::vector<std::uint8_t>& mask() { return mask_; }

  bool operator==(const EpipolarVolume&) const = default;

 private:
  std::size_t index(int c, int k, int x, int y) const {
    return ((static_cast<std::size_t>(c) * z_ + k) * h_ + y) * w_ + x;
  }
  std::size_t mask_index(int k, int x, int y) const {
    return (static_cast<std::size_t>(k) * h_ + y) * w_ + x;
  }

  int w_ = 0, h_ = 0, z_ = 0;
  std::vector<float> data_;
  std::vector<std::uint8_t> mask_;
};

/// Light ray projects to a single point at this pixel.
class DegenerateProjection : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct ScreenDir {
  double x = 0.0;
  double y = 0.0;
};

/// Unit image-plane direction in which X(p) + t*l moves for small t > 0,
/// where X(p) is the surface point seen through continuous image point
/// (px, py). Independent of the depth at p.
ScreenDir project_light_dir(const LightDirection& l, const CameraModel& cam, double px, double py);

/// Ratio volume. ratio = D_map(s) / z_ray: above 1 when the marched point is
/// in front of the observed surface, below 1 when it is behind it.
EpipolarVolume march_ratios(const DepthMap& depth, const ColorImage& img, const LightDirection& l,
                            const CameraModel& cam, const RayMarchConfig& cfg);

/// Occluded when some valid sample lies behind the observed surface by at
/// most tau in relative depth: z_ray / D_map in [1, 1 + tau]. Output is
/// (1 - occluded) * lambert.
ShadowImage direct_shadow(const EpipolarVolume& vol, const ShadowImage& lambert,
                          const RayMarchConfig& cfg);

/// Binary occlusion mask (1 = occluded) behind direct_shadow.
Raster<float> direct_occlusion(const EpipolarVolume& vol, double tau);

/// Elementwise vis * lambert; vis must be 0 or 1.
ShadowImage shadow_image_from_visibility(const Raster<float>& vis, const ShadowImage& lambert);

/// Raw float blob with a JSON header (dims, channel order, config echo).
std::vector<std::uint8_t> encode_volume(const EpipolarVolume& vol, const RayMarchConfig& cfg);
EpipolarVolume decode_volume(const std::vector<std::uint8_t>& bytes,
                             RayMarchConfig* cfg_out = nullptr);

}  // namespace relight::raymarch
