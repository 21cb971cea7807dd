#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relight/geometry/geometry.hpp"
#include "relight/models/networks.hpp"
#include "relight/nn/checkpoint.hpp"
#include "relight/raymarch/raymarch.hpp"

namespace relight::models {

/// Learned variants compared in the ablation.
///   ours:    C over the epipolar volume, refiner, relighter with shadows
///   two_d:   C replaced by the 2D shadow net, otherwise as ours
///   pix2pix: relighter only, no shadow channels
enum class Method { ours, two_d, pix2pix };
const char* method_name(Method m);
Method method_from_name(const std::string& s);

// Raster (HWC) <-> tensor (1,C,H,W).
Tensor<float> to_tensor(const Raster<float>& r);
Raster<float> to_raster(const Tensor<float>& t, int sample = 0);
ColorImage to_color(const Tensor<float>& t, int sample = 0);
ShadowImage to_shadow(const Tensor<float>& t, int sample = 0);

/// (1,4,Z,H,W): RGB as sampled, ratio mapped to clamp(log r, -c, c).
Tensor<float> volume_tensor(const raymarch::EpipolarVolume& vol, double log_clamp);

/// log(depth / mean depth) as (1,1,H,W).
Tensor<float> log_depth_tensor(const DepthMap& depth);

/// Ray-march settings used to build network inputs for `cfg`.
raymarch::RayMarchConfig march_config(const ModelConfig& cfg);

/// Network inputs for one direction pair. Fields a method does not use stay
/// undefined. N is the batch size.
struct GeneratorInputs {
  Tensor<float> color;                 // old color (N,3,H,W)
  Tensor<float> normals, psi;          // (N,3,H,W)
  Tensor<float> l_old, l_new;          // broadcast (N,3,H,W)
  Tensor<float> vol_old, feat_old;     // ours
  Tensor<float> vol_new, feat_new;
  Tensor<float> cos_old, cos_new;      // two_d
  Tensor<float> logd_old, logd_new;
};

/// `depth_old` feeds normals and everything in the old direction;
/// `depth_new` feeds the new-direction shadow inputs.
GeneratorInputs make_inputs(const ColorImage& color, const DepthMap& depth_old,
                            const DepthMap& depth_new, const CameraModel& cam,
                            const LightDirection& l_old, const LightDirection& l_new,
                            const ModelConfig& cfg, Method method);

/// Concatenation along the batch axis.
GeneratorInputs stack_inputs(const std::vector<GeneratorInputs>& xs);

struct GeneratorOutputs {
  Tensor<float> s_new;   // shadow net in the new direction (undefined for pix2pix)
  Tensor<float> c_old;   // shadow net in the old direction, detached
  Tensor<float> s_old;   // refined old shadow
  Tensor<float> relit;
};

/// All generator-side networks of one method.
class Generator : public nn::Module<float> {
 public:
  Generator(const ModelConfig& cfg, Method method, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  Method method() const { return method_; }

  /// Shadow prediction for the new direction (C or the 2D net).
  Tensor<float> new_shadow(const GeneratorInputs& in) const;
  /// Shadow prediction for the old direction, computed without a graph.
  Tensor<float> old_shadow_detached(const GeneratorInputs& in) const;
  GeneratorOutputs forward(const GeneratorInputs& in) const;

  CastShadowNet<float>* cast() const { return cast_; }
  Shadow2DNet<float>* shadow2d() const { return shadow2d_; }
  RefineNet<float>* refine() const { return refine_; }
  RelightNet<float>* relight() const { return relight_; }

 private:
  ModelConfig cfg_;
  Method method_;
  CastShadowNet<float>* cast_ = nullptr;
  Shadow2DNet<float>* shadow2d_ = nullptr;
  RefineNet<float>* refine_ = nullptr;
  RelightNet<float>* relight_ = nullptr;
};

/// Inputs derived once per photograph.
struct PreparedView {
  ColorImage color;
  DepthMap depth;
  CameraModel camera;
  geometry::NormalMap normals;
  geometry::DirectionMap psi;

  PreparedView(ColorImage color, DepthMap depth, const CameraModel& camera);
};

/// Learned shadow for one light (C output, or the 2D net for two_d).
ShadowImage learned_shadow(const Generator& g, const PreparedView& v, const LightDirection& l);

/// Direct ray-marched shadow with thickness tau.
ShadowImage direct_shadow_image(const PreparedView& v, const LightDirection& l, int steps,
                                double tau);

struct RelightResult {
  std::optional<ShadowImage> s_old;   // refined; absent for pix2pix
  std::optional<ShadowImage> s_new;
  ColorImage relit;
};

/// Full inference: old shadow via the shadow net plus refiner, new shadow,
/// then the relighter.
RelightResult relight_image(const Generator& g, const PreparedView& v, const LightDirection& l_old,
                            const LightDirection& l_new);

/// Relighter fed externally computed shadows (the Direct ablation row).
ColorImage relight_with_shadows(const Generator& g, const PreparedView& v,
                                const ShadowImage& s_old, const ShadowImage& s_new,
                                const LightDirection& l_old, const LightDirection& l_new);

/// Weights plus a model-config JSON written beside them
/// (`<stem>.json` for `<stem>.ckpt`).
void save_generator(const std::filesystem::path& path, const Generator& g,
                    const nlohmann::json& extra_meta = nlohmann::json::object());
std::unique_ptr<Generator> load_generator(const std::filesystem::path& path);
std::unique_ptr<Generator> generator_from_checkpoint(const nn::Checkpoint& c);

nlohmann::json model_meta(const ModelConfig& cfg, Method m);

}  // namespace relight::models
