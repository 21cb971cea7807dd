#include "relight/models/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace relight::models {

namespace {

using Tf = Tensor<float>;

std::array<double, 3> light_array(const LightDirection& l) { return {l.x(), l.y(), l.z()}; }

Tf broadcast1(const LightDirection& l, int h, int w) {
  return broadcast_light<float>({light_array(l)}, h, w);
}

Tf stack_field(const std::vector<GeneratorInputs>& xs, Tf GeneratorInputs::*field) {
  if (!(xs.front().*field).defined()) return {};
  std::vector<Tf> parts;
  parts.reserve(xs.size());
  for (const auto& x : xs) parts.push_back(x.*field);
  return nn::concat(parts, 0);
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::ours: return "ours";
    case Method::two_d: return "2d";
    case Method::pix2pix: return "pix2pix";
  }
  return "?";
}

Method method_from_name(const std::string& s) {
  if (s == "ours") return Method::ours;
  if (s == "2d") return Method::two_d;
  if (s == "pix2pix") return Method::pix2pix;
  throw ValidationError("unknown method '" + s + "' (ours, 2d, pix2pix)");
}

Tf to_tensor(const Raster<float>& r) {
  const int h = r.height(), w = r.width(), c = r.channels();
  std::vector<float> out(r.size());
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < c; ++k) {
        out[static_cast<std::size_t>(k) * plane + static_cast<std::size_t>(y) * w + x] = r.at(x, y, k);
      }
    }
  }
  return Tf({1, c, h, w}, std::move(out));
}

Raster<float> to_raster(const Tf& t, int sample) {
  if (t.rank() != 4 || sample < 0 || sample >= t.dim(0)) {
    throw ValidationError("to_raster: bad tensor " + nn::shape_str(t.shape()));
  }
  const int c = t.dim(1), h = t.dim(2), w = t.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const float* base = t.ptr() + static_cast<std::size_t>(sample) * c * plane;
  Raster<float> r(w, h, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < c; ++k) {
        r.at(x, y, k) = base[static_cast<std::size_t>(k) * plane + static_cast<std::size_t>(y) * w + x];
      }
    }
  }
  return r;
}

ColorImage to_color(const Tf& t, int sample) {
  Raster<float> r = to_raster(t, sample);
  if (r.channels() != 3) throw ValidationError("to_color: expected 3 channels");
  return ColorImage(std::move(r));
}

ShadowImage to_shadow(const Tf& t, int sample) {
  Raster<float> r = to_raster(t, sample);
  if (r.channels() != 1) throw ValidationError("to_shadow: expected 1 channel");
  for (float& v : r.data()) v = std::clamp(v, 0.0f, 1.0f);
  return ShadowImage(std::move(r));
}

Tf volume_tensor(const raymarch::EpipolarVolume& vol, double log_clamp) {
  std::vector<float> out = vol.data();
  const std::size_t n = static_cast<std::size_t>(vol.steps()) * vol.height() * vol.width();
  float* ratio = out.data() + static_cast<std::size_t>(raymarch::EpipolarVolume::kRatio) * n;
  const float c = static_cast<float>(log_clamp);
  for (std::size_t i = 0; i < n; ++i) ratio[i] = std::clamp(std::log(ratio[i]), -c, c);
  return Tf({1, raymarch::EpipolarVolume::kChannels, vol.steps(), vol.height(), vol.width()},
            std::move(out));
}

Tf log_depth_tensor(const DepthMap& depth) {
  const auto& d = depth.raster().storage();
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  std::vector<float> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = static_cast<float>(std::log(d[i] / mean));
  return Tf({1, 1, depth.height(), depth.width()}, std::move(out));
}

raymarch::RayMarchConfig march_config(const ModelConfig& cfg) {
  raymarch::RayMarchConfig m;
  m.steps = cfg.steps;
  return m;
}

GeneratorInputs make_inputs(const ColorImage& color, const DepthMap& depth_old,
                            const DepthMap& depth_new, const CameraModel& cam,
                            const LightDirection& l_old, const LightDirection& l_new,
                            const ModelConfig& cfg, Method method) {
  const int w = color.width(), h = color.height();
  if (w != cfg.width || h != cfg.height || !depth_old.raster().same_size(w, h) ||
      !depth_new.raster().same_size(w, h)) {
    throw ValidationError("inputs must be " + shape_string(cfg.width, cfg.height, 3) + ", got color " +
                          shape_string(w, h, 3) + ", depth " +
                          shape_string(depth_old.width(), depth_old.height(), 1));
  }
  GeneratorInputs in;
  in.color = to_tensor(color.raster());
  const geometry::NormalMap n_old = geometry::normals_from_depth(depth_old, cam);
  in.normals = to_tensor(n_old.raster());
  in.psi = to_tensor(geometry::direction_map(cam, w, h).raster());
  in.l_old = broadcast1(l_old, h, w);
  in.l_new = broadcast1(l_new, h, w);
  if (method == Method::pix2pix) return in;

  const bool same = depth_new == depth_old;
  const geometry::NormalMap n_new = same ? n_old : geometry::normals_from_depth(depth_new, cam);
  if (method == Method::ours) {
    const auto mc = march_config(cfg);
    in.vol_old = volume_tensor(raymarch::march_ratios(depth_old, color, l_old, cam, mc),
                               cfg.ratio_log_clamp);
    in.feat_old = to_tensor(geometry::two_d_features(color, n_old, l_old));
    in.vol_new = volume_tensor(raymarch::march_ratios(depth_new, color, l_new, cam, mc),
                               cfg.ratio_log_clamp);
    in.feat_new = to_tensor(geometry::two_d_features(color, n_new, l_new));
  } else {
    in.cos_old = to_tensor(geometry::lambert_guide(n_old, l_old).raster());
    in.cos_new = to_tensor(geometry::lambert_guide(n_new, l_new).raster());
    in.logd_old = log_depth_tensor(depth_old);
    in.logd_new = same ? in.logd_old : log_depth_tensor(depth_new);
  }
  return in;
}

GeneratorInputs stack_inputs(const std::vector<GeneratorInputs>& xs) {
  if (xs.empty()) throw ValidationError("stack_inputs: empty batch");
  if (xs.size() == 1) return xs.front();
  GeneratorInputs out;
  for (auto f : {&GeneratorInputs::color, &GeneratorInputs::normals, &GeneratorInputs::psi,
                 &GeneratorInputs::l_old, &GeneratorInputs::l_new, &GeneratorInputs::vol_old,
                 &GeneratorInputs::feat_old, &GeneratorInputs::vol_new, &GeneratorInputs::feat_new,
                 &GeneratorInputs::cos_old, &GeneratorInputs::cos_new, &GeneratorInputs::logd_old,
                 &GeneratorInputs::logd_new}) {
    out.*f = stack_field(xs, f);
  }
  return out;
}

Generator::Generator(const ModelConfig& cfg, Method method, std::uint64_t seed)
    : cfg_(cfg), method_(method) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  if (method == Method::ours) {
    cast_ = &add_module("cast", std::make_unique<CastShadowNet<float>>(cfg, rng));
  } else if (method == Method::two_d) {
    shadow2d_ = &add_module("shadow2d", std::make_unique<Shadow2DNet<float>>(cfg, rng));
  }
  if (method != Method::pix2pix) {
    refine_ = &add_module("refine", std::make_unique<RefineNet<float>>(cfg, rng));
  }
  relight_ = &add_module("relight",
                         std::make_unique<RelightNet<float>>(cfg, method != Method::pix2pix, rng));
}

Tf Generator::new_shadow(const GeneratorInputs& in) const {
  if (cast_) return cast_->forward(in.vol_new, in.feat_new);
  if (shadow2d_) return shadow2d_->forward(in.color, in.l_new, in.cos_new, in.logd_new);
  throw ContractError("pix2pix generator has no shadow network");
}

Tf Generator::old_shadow_detached(const GeneratorInputs& in) const {
  nn::NoGradGuard guard;
  if (cast_) return cast_->forward(in.vol_old, in.feat_old);
  if (shadow2d_) return shadow2d_->forward(in.color, in.l_old, in.cos_old, in.logd_old);
  throw ContractError("pix2pix generator has no shadow network");
}

GeneratorOutputs Generator::forward(const GeneratorInputs& in) const {
  GeneratorOutputs out;
  if (method_ != Method::pix2pix) {
    out.s_new = new_shadow(in);
    out.c_old = old_shadow_detached(in);
    out.s_old = refine_->forward(out.c_old, in.color, in.l_old);
  }
  out.relit = relight_->forward(in.color, out.s_old, out.s_new, in.normals, in.psi, in.l_old, in.l_new);
  return out;
}

PreparedView::PreparedView(ColorImage c, DepthMap d, const CameraModel& cam)
    : color(std::move(c)),
      depth(std::move(d)),
      camera(cam),
      normals(geometry::normals_from_depth(depth, cam)),
      psi(geometry::direction_map(cam, color.width(), color.height())) {
  cam.validate(color.width(), color.height());
  if (!depth.raster().same_size(color.width(), color.height())) {
    throw ValidationError("color " + shape_string(color.width(), color.height(), 3) +
                          " and depth " + shape_string(depth.width(), depth.height(), 1) +
                          " differ in size");
  }
}

ShadowImage learned_shadow(const Generator& g, const PreparedView& v, const LightDirection& l) {
  nn::NoGradGuard guard;
  const GeneratorInputs in = make_inputs(v.color, v.depth, v.depth, v.camera, l, l, g.config(), g.method());
  return to_shadow(g.new_shadow(in));
}

ShadowImage direct_shadow_image(const PreparedView& v, const LightDirection& l, int steps,
                                double tau) {
  raymarch::RayMarchConfig mc;
  mc.steps = steps;
  mc.tau = tau;
  const auto vol = raymarch::march_ratios(v.depth, v.color, l, v.camera, mc);
  return raymarch::direct_shadow(vol, geometry::lambert_guide(v.normals, l), mc);
}

RelightResult relight_image(const Generator& g, const PreparedView& v, const LightDirection& l_old,
                            const LightDirection& l_new) {
  nn::NoGradGuard guard;
  const GeneratorInputs in =
      make_inputs(v.color, v.depth, v.depth, v.camera, l_old, l_new, g.config(), g.method());
  const GeneratorOutputs out = g.forward(in);
  RelightResult r{std::nullopt, std::nullopt, to_color(out.relit)};
  if (out.s_old.defined()) r.s_old = to_shadow(out.s_old);
  if (out.s_new.defined()) r.s_new = to_shadow(out.s_new);
  return r;
}

ColorImage relight_with_shadows(const Generator& g, const PreparedView& v,
                                const ShadowImage& s_old, const ShadowImage& s_new,
                                const LightDirection& l_old, const LightDirection& l_new) {
  if (!g.relight()->use_shadows()) throw ContractError("relighter takes no shadow channels");
  nn::NoGradGuard guard;
  const GeneratorInputs in =
      make_inputs(v.color, v.depth, v.depth, v.camera, l_old, l_new, g.config(), Method::pix2pix);
  return to_color(g.relight()->forward(in.color, to_tensor(s_old.raster()), to_tensor(s_new.raster()),
                                       in.normals, in.psi, in.l_old, in.l_new));
}

nlohmann::json model_meta(const ModelConfig& cfg, Method m) {
  return {{"model_config", cfg}, {"method", method_name(m)}};
}

void save_generator(const std::filesystem::path& path, const Generator& g,
                    const nlohmann::json& extra_meta) {
  nn::Checkpoint c;
  c.meta = extra_meta;
  c.meta.update(model_meta(g.config(), g.method()));
  nn::append_params(c, "gen.", g.parameters());
  nn::save_checkpoint(path, c);
  auto side = path;
  side.replace_extension(".json");
  std::ofstream f(side);
  if (!f) throw IoError("cannot write " + side.string());
  f << model_meta(g.config(), g.method()).dump(2) << '\n';
}

std::unique_ptr<Generator> generator_from_checkpoint(const nn::Checkpoint& c) {
  if (!c.meta.contains("model_config") || !c.meta.contains("method")) {
    throw ValidationError("checkpoint lacks model_config/method metadata");
  }
  const auto cfg = c.meta.at("model_config").get<ModelConfig>();
  auto g = std::make_unique<Generator>(cfg, method_from_name(c.meta.at("method").get<std::string>()), 0);
  auto ps = g->parameters();
  nn::load_params(c, "gen.", ps);
  return g;
}

std::unique_ptr<Generator> load_generator(const std::filesystem::path& path) {
  return generator_from_checkpoint(nn::load_checkpoint(path));
}

}  // namespace relight::models
