#include "relight/models/networks.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace relight::models {

using nn::ConvGeom;
using nn::ConvLayer;

namespace {

constexpr double kSlope = 0.2;

int ch2d(int f, int level) { return f * std::min(1 << level, 4); }
int ch3d(int f, int level) { return level == 0 ? 4 : f * std::min(1 << (level - 1), 4); }

template <typename T>
std::unique_ptr<ConvLayer<T>> conv2d(int in, int out, int k, int s, int p, std::mt19937_64& rng) {
  return std::make_unique<ConvLayer<T>>(in, out, ConvGeom::k2d(k, s, p), false, rng);
}

template <typename T>
Tensor<T> lrelu(const Tensor<T>& x) {
  return nn::leaky_relu(x, static_cast<T>(kSlope));
}

}  // namespace

void ModelConfig::validate() const {
  if (levels < 3) throw ValidationError("model needs at least 3 levels");
  const int div = 1 << levels;
  if (width <= 0 || height <= 0 || width % div || height % div) {
    throw ValidationError("model size " + std::to_string(width) + "x" + std::to_string(height) +
                          " must be a positive multiple of " + std::to_string(div));
  }
  if (steps < div || (steps & (steps - 1)) != 0) {
    throw ValidationError("volume steps must be a power of two >= " + std::to_string(div));
  }
  if (features <= 0) throw ValidationError("feature width must be positive");
  if (!(ratio_log_clamp > 0.0)) throw ValidationError("ratio_log_clamp must be positive");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"width", c.width},       {"height", c.height},
                     {"steps", c.steps},       {"features", c.features},
                     {"levels", c.levels},     {"ratio_log_clamp", c.ratio_log_clamp}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.steps = j.at("steps").get<int>();
  c.features = j.at("features").get<int>();
  c.levels = j.at("levels").get<int>();
  c.ratio_log_clamp = j.at("ratio_log_clamp").get<double>();
  c.validate();
}

template <typename T>
ResidualBlock<T>::ResidualBlock(int channels, std::mt19937_64& rng) {
  a_ = &this->add_module("a", conv2d<T>(channels, channels, 3, 1, 1, rng));
  b_ = &this->add_module("b", conv2d<T>(channels, channels, 3, 1, 1, rng));
}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x) const {
  return lrelu(nn::add(x, b_->forward(lrelu(a_->forward(x)))));
}

template <typename T>
UNet2D<T>::UNet2D(int in_channels, int out_channels, int features, int levels, std::mt19937_64& rng)
    : in_(in_channels) {
  const int f = features;
  stem_ = &this->add_module("stem", conv2d<T>(in_channels, f, 3, 1, 1, rng));
  for (int i = 0; i < levels; ++i) {
    down_.push_back(&this->add_module("down" + std::to_string(i),
                                      conv2d<T>(ch2d(f, i), ch2d(f, i + 1), 4, 2, 1, rng)));
  }
  mid_ = &this->add_module("mid", std::make_unique<ResidualBlock<T>>(ch2d(f, levels), rng));
  int cur = ch2d(f, levels);
  for (int i = levels - 1; i >= 0; --i) {
    up_.push_back(&this->add_module("up" + std::to_string(i),
                                    conv2d<T>(cur + ch2d(f, i), ch2d(f, i), 3, 1, 1, rng)));
    cur = ch2d(f, i);
  }
  head_ = &this->add_module("head", conv2d<T>(cur, out_channels, 3, 1, 1, rng));
}

template <typename T>
Tensor<T> UNet2D<T>::forward(const Tensor<T>& x) const {
  if (x.rank() != 4 || x.dim(1) != in_) {
    throw ValidationError("UNet2D expects (N," + std::to_string(in_) + ",H,W), got " +
                          nn::shape_str(x.shape()));
  }
  std::vector<Tensor<T>> skips{lrelu(stem_->forward(x))};
  for (const auto* d : down_) skips.push_back(lrelu(d->forward(skips.back())));
  Tensor<T> y = mid_->forward(skips.back());
  const int levels = static_cast<int>(down_.size());
  for (int k = 0; k < levels; ++k) {
    const Tensor<T>& s = skips[static_cast<std::size_t>(levels - 1 - k)];
    y = nn::relu(up_[static_cast<std::size_t>(k)]->forward(
        nn::concat<T>({nn::resize_bilinear(y, s.dim(2), s.dim(3)), s}, 1)));
  }
  return head_->forward(y);
}

template <typename T>
CastShadowNet<T>::CastShadowNet(const ModelConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  cfg.validate();
  const int f = cfg.features;
  const int L = cfg.levels;
  for (int i = 0; i < L; ++i) {
    down3d_.push_back(&this->add_module(
        "down3d" + std::to_string(i),
        std::make_unique<ConvLayer<T>>(ch3d(f, i), ch3d(f, i + 1),
                                       ConvGeom::k3d({4, 4, 4}, {2, 2, 2}, {1, 1, 1}), true, rng)));
  }
  int depth = cfg.steps >> L;
  for (int i = 0; depth > 1; ++i, depth /= 2) {
    collapse_.push_back(&this->add_module(
        "collapse" + std::to_string(i),
        std::make_unique<ConvLayer<T>>(ch3d(f, L), ch3d(f, L),
                                       ConvGeom::k3d({4, 3, 3}, {2, 1, 1}, {1, 1, 1}), true, rng)));
  }
  stem2d_ = &this->add_module("stem2d", conv2d<T>(4, f, 3, 1, 1, rng));
  for (int i = 0; i < L; ++i) {
    down2d_.push_back(&this->add_module("down2d" + std::to_string(i),
                                        conv2d<T>(ch2d(f, i), ch2d(f, i + 1), 4, 2, 1, rng)));
  }
  if (ch2d(f, L) != ch3d(f, L)) throw ValidationError("encoder widths disagree at the bottleneck");
  mid_ = &this->add_module("mid", std::make_unique<ResidualBlock<T>>(ch2d(f, L), rng));
  int cur = ch2d(f, L);
  for (int i = L - 1; i >= 0; --i) {
    const int in = cur + ch2d(f, i) + (i >= 1 ? ch3d(f, i) : 0);
    up_.push_back(&this->add_module("up" + std::to_string(i), conv2d<T>(in, ch2d(f, i), 3, 1, 1, rng)));
    cur = ch2d(f, i);
  }
  head_ = &this->add_module("head", conv2d<T>(cur, 1, 3, 1, 1, rng));
}

template <typename T>
Tensor<T> CastShadowNet<T>::forward(const Tensor<T>& vol, const Tensor<T>& feat2d) const {
  const nn::Shape want_v{vol.rank() == 5 ? vol.dim(0) : -1, 4, cfg_.steps, cfg_.height, cfg_.width};
  if (vol.shape() != want_v) {
    throw ValidationError("cast_shadow: volume " + nn::shape_str(vol.shape()) + ", expected " +
                          nn::shape_str(want_v));
  }
  const nn::Shape want_f{vol.dim(0), 4, cfg_.height, cfg_.width};
  if (feat2d.shape() != want_f) {
    throw ValidationError("cast_shadow: 2D features " + nn::shape_str(feat2d.shape()) +
                          ", expected " + nn::shape_str(want_f));
  }
  const int L = cfg_.levels;
  std::vector<Tensor<T>> s3{vol};
  for (const auto* d : down3d_) s3.push_back(lrelu(d->forward(s3.back())));
  Tensor<T> v = s3.back();
  for (const auto* c : collapse_) v = lrelu(c->forward(v));
  v = nn::reshape(v, {v.dim(0), v.dim(1), v.dim(3), v.dim(4)});

  std::vector<Tensor<T>> s2{lrelu(stem2d_->forward(feat2d))};
  for (const auto* d : down2d_) s2.push_back(lrelu(d->forward(s2.back())));

  Tensor<T> y = mid_->forward(nn::max_merge(s2.back(), v));
  for (int k = 0; k < L; ++k) {
    const int i = L - 1 - k;
    const Tensor<T>& skip = s2[static_cast<std::size_t>(i)];
    const int h = skip.dim(2), w = skip.dim(3);
    std::vector<Tensor<T>> parts{nn::resize_bilinear(y, h, w), skip};
    if (i >= 1) parts.push_back(nn::linear_upsample(s3[static_cast<std::size_t>(i)], h, w));
    y = nn::relu(up_[static_cast<std::size_t>(k)]->forward(nn::concat(parts, 1)));
  }
  return nn::sigmoid(head_->forward(y));
}

template <typename T>
RefineNet<T>::RefineNet(const ModelConfig& cfg, std::mt19937_64& rng) {
  net_ = &this->add_module("unet", std::make_unique<UNet2D<T>>(kInputs, 1, cfg.features, cfg.levels, rng));
}

template <typename T>
Tensor<T> RefineNet<T>::forward(const Tensor<T>& c_out, const Tensor<T>& color,
                                const Tensor<T>& l_old) const {
  if (c_out.requires_grad()) throw ContractError("refiner input must be detached from C");
  // Logit of the clamped input; the network predicts a residual on top.
  std::vector<T> lg(c_out.numel());
  constexpr double e = 1e-4;
  for (std::size_t i = 0; i < lg.size(); ++i) {
    const double p = std::clamp(static_cast<double>(c_out.data()[i]), e, 1.0 - e);
    lg[i] = static_cast<T>(std::log(p / (1.0 - p)));
  }
  const Tensor<T> logit(c_out.shape(), std::move(lg));
  const Tensor<T> delta = net_->forward(nn::concat<T>({c_out, color, l_old}, 1));
  return nn::sigmoid(nn::add(logit, delta));
}

template <typename T>
RelightNet<T>::RelightNet(const ModelConfig& cfg, bool use_shadows, std::mt19937_64& rng)
    : use_shadows_(use_shadows) {
  net_ = &this->add_module(
      "unet", std::make_unique<UNet2D<T>>(use_shadows ? 17 : 15, 3, cfg.features, cfg.levels, rng));
}

template <typename T>
Tensor<T> RelightNet<T>::forward(const Tensor<T>& color, const Tensor<T>& s_old,
                                 const Tensor<T>& s_new, const Tensor<T>& normals,
                                 const Tensor<T>& psi, const Tensor<T>& l_old,
                                 const Tensor<T>& l_new) const {
  std::vector<Tensor<T>> parts{color};
  if (use_shadows_) {
    parts.push_back(s_old);
    parts.push_back(s_new);
  }
  parts.insert(parts.end(), {normals, psi, l_old, l_new});
  return nn::relu(nn::add(color, net_->forward(nn::concat(parts, 1))));
}

template <typename T>
Shadow2DNet<T>::Shadow2DNet(const ModelConfig& cfg, std::mt19937_64& rng) {
  net_ = &this->add_module("unet", std::make_unique<UNet2D<T>>(kInputs, 1, cfg.features, cfg.levels, rng));
}

template <typename T>
Tensor<T> Shadow2DNet<T>::forward(const Tensor<T>& color, const Tensor<T>& light,
                                  const Tensor<T>& cosine, const Tensor<T>& log_depth) const {
  return nn::sigmoid(net_->forward(nn::concat<T>({color, light, cosine, log_depth}, 1)));
}

template <typename T>
PatchDiscriminator<T>::PatchDiscriminator(const ModelConfig& cfg, std::mt19937_64& rng) {
  const int f = cfg.features;
  struct L {
    int in, out, k, s, p;
  };
  const L spec[] = {{kInputs, f, 4, 2, 1}, {f, 2 * f, 5, 2, 2}, {2 * f, 4 * f, 4, 2, 1},
                    {4 * f, 4 * f, 4, 1, 1}, {4 * f, 1, 3, 1, 1}};
  int i = 0;
  for (const L& l : spec) {
    layers_.push_back(&this->add_module("c" + std::to_string(i++),
                                        conv2d<T>(l.in, l.out, l.k, l.s, l.p, rng)));
  }
}

template <typename T>
Tensor<T> PatchDiscriminator<T>::forward(const Tensor<T>& candidate, const Tensor<T>& old_color,
                                         const Tensor<T>& new_shadow) const {
  Tensor<T> y = nn::concat<T>({candidate, old_color, new_shadow}, 1);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    y = layers_[i]->forward(y);
    if (i + 1 < layers_.size()) y = lrelu(y);
  }
  return y;
}

template <typename T>
Tensor<T> broadcast_light(const std::vector<std::array<double, 3>>& lights, int h, int w) {
  const int n = static_cast<int>(lights.size());
  std::vector<T> out(static_cast<std::size_t>(n) * 3 * h * w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int b = 0; b < n; ++b) {
    for (int c = 0; c < 3; ++c) {
      std::fill_n(out.data() + (static_cast<std::size_t>(b) * 3 + c) * plane, plane,
                  static_cast<T>(lights[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)]));
    }
  }
  return Tensor<T>({n, 3, h, w}, std::move(out));
}

template class ResidualBlock<float>;
template class ResidualBlock<double>;
template class UNet2D<float>;
template class UNet2D<double>;
template class CastShadowNet<float>;
template class CastShadowNet<double>;
template class RefineNet<float>;
template class RefineNet<double>;
template class RelightNet<float>;
template class RelightNet<double>;
template class Shadow2DNet<float>;
template class Shadow2DNet<double>;
template class PatchDiscriminator<float>;
template class PatchDiscriminator<double>;
template Tensor<float> broadcast_light(const std::vector<std::array<double, 3>>&, int, int);
template Tensor<double> broadcast_light(const std::vector<std::array<double, 3>>&, int, int);

}  // namespace relight::models
