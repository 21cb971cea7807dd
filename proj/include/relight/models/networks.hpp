#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "json.hpp"
#include "relight/nn/module.hpp"
#include "relight/nn/ops.hpp"

namespace relight::models {

using nn::Tensor;

/// Sizes shared by every network. Toy defaults; full scale is
/// 384x384 crops with Z = 256.
struct ModelConfig {
  int width = 64;
  int height = 64;
  int steps = 32;     // Z of the epipolar volume fed to C
  int features = 8;   // base width F
  int levels = 3;     // stride-2 stages per encoder
  double ratio_log_clamp = 3.0;  // ratio channel -> clamp(log r, -c, c)

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// conv3 -> leaky -> conv3, added to the input, then leaky.
template <typename T>
class ResidualBlock : public nn::Module<T> {
 public:
  ResidualBlock(int channels, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& x) const;

 private:
  nn::ConvLayer<T>* a_;
  nn::ConvLayer<T>* b_;
};

/// 2D encoder-decoder: conv3 stem, `levels` stride-2 downs (F, 2F, 4F, 4F...),
/// residual bottleneck, bilinear-up + skip-concat + conv3 decoder, conv3 head.
/// Output is the raw head (no activation).
template <typename T>
class UNet2D : public nn::Module<T> {
 public:
  UNet2D(int in_channels, int out_channels, int features, int levels, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& x) const;
  nn::ConvLayer<T>& head() { return *head_; }
  int in_channels() const { return in_; }

 private:
  int in_;
  nn::ConvLayer<T>* stem_;
  std::vector<nn::ConvLayer<T>*> down_;
  ResidualBlock<T>* mid_;
  std::vector<nn::ConvLayer<T>*> up_;
  nn::ConvLayer<T>* head_;
};

/// Cast-shadow network C. Inputs: volume (N,4,Z,H,W) with the ratio channel
/// already log-clamped, and 2D features (N,4,H,W). Output (N,1,H,W) in [0,1].
template <typename T>
class CastShadowNet : public nn::Module<T> {
 public:
  CastShadowNet(const ModelConfig& cfg, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& vol, const Tensor<T>& feat2d) const;
  nn::ConvLayer<T>& head() { return *head_; }
  int collapse_stages() const { return static_cast<int>(collapse_.size()); }
  const ModelConfig& config() const { return cfg_; }

 private:
  ModelConfig cfg_;
  std::vector<nn::ConvLayer<T>*> down3d_;
  std::vector<nn::ConvLayer<T>*> collapse_;
  nn::ConvLayer<T>* stem2d_;
  std::vector<nn::ConvLayer<T>*> down2d_;
  ResidualBlock<T>* mid_;
  std::vector<nn::ConvLayer<T>*> up_;
  nn::ConvLayer<T>* head_;
};

/// Refiner S: UNet over [C output, color, l_old x3]; residual in logit space.
template <typename T>
class RefineNet : public nn::Module<T> {
 public:
  static constexpr int kInputs = 7;
  RefineNet(const ModelConfig& cfg, std::mt19937_64& rng);
  /// c_out must not require grad (it is detached from C by contract).
  Tensor<T> forward(const Tensor<T>& c_out, const Tensor<T>& color, const Tensor<T>& l_old) const;

 private:
  UNet2D<T>* net_;
};

/// Relighter R: UNet over [color, s_old, s_new, normals, psi, l_old, l_new]
/// (17 channels); output relu(color + delta). With `use_shadows` false the
/// two shadow channels are dropped (15 channels, the no-shadow baseline).
template <typename T>
class RelightNet : public nn::Module<T> {
 public:
  RelightNet(const ModelConfig& cfg, bool use_shadows, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& color, const Tensor<T>& s_old, const Tensor<T>& s_new,
                    const Tensor<T>& normals, const Tensor<T>& psi, const Tensor<T>& l_old,
                    const Tensor<T>& l_new) const;
  bool use_shadows() const { return use_shadows_; }

 private:
  bool use_shadows_;
  UNet2D<T>* net_;
};

/// 2D ablation shadow net: refiner architecture over
/// [color, l x3, cosine, log(depth / mean depth)]; sigmoid output.
template <typename T>
class Shadow2DNet : public nn::Module<T> {
 public:
  static constexpr int kInputs = 8;
  Shadow2DNet(const ModelConfig& cfg, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& color, const Tensor<T>& light, const Tensor<T>& cosine,
                    const Tensor<T>& log_depth) const;

 private:
  UNet2D<T>* net_;
};

/// Conditioned patch discriminator over [candidate, old color, new shadow].
/// Receptive field of one output unit: 64x64 input pixels.
template <typename T>
class PatchDiscriminator : public nn::Module<T> {
 public:
  static constexpr int kInputs = 7;
  static constexpr int kReceptiveField = 64;
  PatchDiscriminator(const ModelConfig& cfg, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& candidate, const Tensor<T>& old_color,
                    const Tensor<T>& new_shadow) const;

 private:
  std::vector<nn::ConvLayer<T>*> layers_;
};

/// (N,3) light vectors broadcast to (N,3,H,W).
template <typename T>
Tensor<T> broadcast_light(const std::vector<std::array<double, 3>>& lights, int h, int w);

extern template class ResidualBlock<float>;
extern template class ResidualBlock<double>;
extern template class UNet2D<float>;
extern template class UNet2D<double>;
extern template class CastShadowNet<float>;
extern template class CastShadowNet<double>;
extern template class RefineNet<float>;
extern template class RefineNet<double>;
extern template class RelightNet<float>;
extern template class RelightNet<double>;
extern template class Shadow2DNet<float>;
extern template class Shadow2DNet<double>;
extern template class PatchDiscriminator<float>;
extern template class PatchDiscriminator<double>;

}  // namespace relight::models
