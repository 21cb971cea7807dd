#include "relight/eval/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "relight/eval/metrics.hpp"

namespace relight::eval {

namespace {

std::string fmt(double v, const char* f = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string opt_csv(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

struct Accum {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

struct Learned {
  std::string method;
  std::string path;
  std::unique_ptr<models::Generator> gen;
  std::string note;
};

Learned load_learned(const std::string& method, const std::string& path) {
  Learned l{method, path, nullptr, ""};
  if (path.empty()) {
    l.note = "skipped: no checkpoint given";
    return l;
  }
  if (!std::filesystem::exists(path)) {
    l.note = "skipped: checkpoint not found";
    return l;
  }
  l.gen = models::load_generator(path);
  if (models::method_name(l.gen->method()) != method) {
    throw ValidationError("checkpoint " + path + " holds method '" +
                          models::method_name(l.gen->method()) + "', expected '" + method + "'");
  }
  return l;
}

}  // namespace

std::vector<EvalPair> eval_pairs(const scene::Manifest& m, scene::Split split, int max_views) {
  std::vector<EvalPair> out;
  int taken = 0;
  for (const scene::ViewEntry* v : m.split(split)) {
    if (max_views > 0 && taken >= max_views) break;
    ++taken;
    const int n = static_cast<int>(v->lights.size());
    if (n < 2) continue;
    const auto idx = static_cast<std::size_t>(v - m.views.data());
    for (int k = 0; k < n; ++k) out.push_back({idx, k, (k + 1) % n});
  }
  return out;
}

EvalSample load_eval_sample(const scene::Manifest& m, const EvalPair& p,
                            const scene::CorruptionConfig& corruption) {
  const scene::ViewEntry& v = m.views.at(p.view_index);
  scene::ViewImages img = scene::load_view(m, v);
  const auto lo = static_cast<std::size_t>(p.light_old);
  const auto ln = static_cast<std::size_t>(p.light_new);
  const std::uint64_t seed = scene::derive_seed(m.config.seed, 3,
                                                static_cast<std::uint64_t>(v.scene) * 1000 + v.view, lo);
  DepthMap est = scene::corrupt_depth(img.depth, seed, corruption, &img.colors[lo]);
  return EvalSample{img.colors[lo],
                    img.colors[ln],
                    img.shadows[lo],
                    img.shadows[ln],
                    std::move(img.depth),
                    std::move(est),
                    v.camera,
                    v.lights[lo].direction,
                    v.lights[ln].direction};
}

std::vector<double> parse_tau_grid(const std::string& spec) {
  double lo = 0, hi = 0;
  int n = 0;
  char extra = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &extra) != 3 || n < 1 || !(lo <= hi) ||
      !(lo > 0.0)) {
    throw ValidationError("tau sweep must be lo:hi:n with 0 < lo <= hi and n >= 1, got '" + spec + "'");
  }
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(lo * std::pow(hi / lo, t));
  }
  return out;
}

TauSweep sweep_tau(const std::vector<EvalSample>& samples, const std::vector<double>& taus,
                   int steps) {
  if (taus.empty()) throw ValidationError("empty tau grid");
  TauSweep s;
  s.taus = taus;
  s.mean_iou.assign(taus.size(), 0.0);
  raymarch::RayMarchConfig mc;
  mc.steps = steps;
  for (const EvalSample& e : samples) {
    const models::PreparedView pv(e.color_old, e.depth_est, e.camera);
    const auto vol = raymarch::march_ratios(pv.depth, pv.color, e.l_new, pv.camera, mc);
    const ShadowImage lambert = geometry::lambert_guide(pv.normals, e.l_new);
    const Raster<float> truth = unlit_mask(e.shadow_new);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      mc.tau = taus[i];
      s.mean_iou[i] += iou(unlit_mask(raymarch::direct_shadow(vol, lambert, mc)), truth);
    }
  }
  for (std::size_t i = 0; i < taus.size(); ++i) {
    s.mean_iou[i] /= static_cast<double>(std::max<std::size_t>(samples.size(), 1));
    if (i == 0 || s.mean_iou[i] > s.best_iou) {
      s.best_iou = s.mean_iou[i];
      s.best_tau = taus[i];
    }
  }
  return s;
}

void to_json(nlohmann::json& j, const AblationConfig& c) {
  j = {{"ckpt_our", c.ckpt_our},   {"ckpt_2d", c.ckpt_2d},       {"ckpt_p2p", c.ckpt_p2p},
       {"tau_grid", c.tau_grid},   {"tau", c.tau},               {"direct_steps", c.direct_steps},
       {"max_views", c.max_views}, {"corruption", c.corruption}, {"split", "test"}};
}

const MethodRow& AblationReport::row(const std::string& method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw ValidationError("report has no row '" + method + "'");
}

std::string dataset_id(const scene::Manifest& m) {
  const auto& c = m.config;
  return "scenegen-seed" + std::to_string(c.seed) + "-s" + std::to_string(c.scenes) + "-v" +
         std::to_string(c.views) + "-l" + std::to_string(c.lights) + "-" + std::to_string(c.width) +
         "x" + std::to_string(c.height);
}

AblationReport run_ablation(const scene::Manifest& m, const AblationConfig& cfg) {
  AblationReport r;
  r.dataset_id = dataset_id(m);
  r.config = cfg;
  r.tau = cfg.tau;
  if (!cfg.tau_grid.empty()) {
    std::vector<EvalSample> val;
    for (const EvalPair& p : eval_pairs(m, scene::Split::val, cfg.max_views)) {
      val.push_back(load_eval_sample(m, p, cfg.corruption));
    }
    r.sweep = sweep_tau(val, cfg.tau_grid, cfg.direct_steps);
    r.tau = r.sweep->best_tau;
  }

  Learned p2p = load_learned("pix2pix", cfg.ckpt_p2p);
  Learned two_d = load_learned("2d", cfg.ckpt_2d);
  Learned ours = load_learned("ours", cfg.ckpt_our);

  Accum p2p_r, p2p_d, two_r, two_d_d, two_s, dir_r, dir_d, dir_s, our_r, our_d, our_s;
  for (const EvalPair& p : eval_pairs(m, scene::Split::test, cfg.max_views)) {
    const EvalSample e = load_eval_sample(m, p, cfg.corruption);
    const models::PreparedView pv(e.color_old, e.depth_est, e.camera);
    const scene::ViewEntry& v = m.views[p.view_index];
    auto row = [&](const std::string& method) {
      ImageRow ir;
      ir.scene = v.scene;
      ir.view = v.view;
      ir.light_old = p.light_old;
      ir.light_new = p.light_new;
      ir.method = method;
      return ir;
    };

    if (p2p.gen) {
      const auto out = models::relight_image(*p2p.gen, pv, e.l_old, e.l_new);
      ImageRow ir = row("pix2pix");
      ir.relight_mse = mse(out.relit, e.color_new);
      ir.relight_dssim = dssim(out.relit, e.color_new);
      p2p_r.add(*ir.relight_mse);
      p2p_d.add(*ir.relight_dssim);
      r.images.push_back(ir);
    }
    if (two_d.gen) {
      const auto out = models::relight_image(*two_d.gen, pv, e.l_old, e.l_new);
      ImageRow ir = row("2d");
      ir.relight_mse = mse(out.relit, e.color_new);
      ir.relight_dssim = dssim(out.relit, e.color_new);
      ir.shadow_mse = mse(*out.s_new, e.shadow_new);
      two_r.add(*ir.relight_mse);
      two_d_d.add(*ir.relight_dssim);
      two_s.add(*ir.shadow_mse);
      r.images.push_back(ir);
    }
    {
      const ShadowImage s_new = models::direct_shadow_image(pv, e.l_new, cfg.direct_steps, r.tau);
      ImageRow ir = row("direct");
      ir.shadow_mse = mse(s_new, e.shadow_new);
      dir_s.add(*ir.shadow_mse);
      if (ours.gen) {
        const ShadowImage s_old = models::direct_shadow_image(pv, e.l_old, cfg.direct_steps, r.tau);
        const ColorImage relit = models::relight_with_shadows(*ours.gen, pv, s_old, s_new, e.l_old, e.l_new);
        ir.relight_mse = mse(relit, e.color_new);
        ir.relight_dssim = dssim(relit, e.color_new);
        dir_r.add(*ir.relight_mse);
        dir_d.add(*ir.relight_dssim);
      }
      r.images.push_back(ir);
    }
    if (ours.gen) {
      const auto out = models::relight_image(*ours.gen, pv, e.l_old, e.l_new);
      ImageRow ir = row("ours");
      ir.relight_mse = mse(out.relit, e.color_new);
      ir.relight_dssim = dssim(out.relit, e.color_new);
      ir.shadow_mse = mse(*out.s_new, e.shadow_new);
      our_r.add(*ir.relight_mse);
      our_d.add(*ir.relight_dssim);
      our_s.add(*ir.shadow_mse);
      r.images.push_back(ir);
    }
  }

  auto learned_row = [](const Learned& l, const Accum& rm, const Accum& rd, const Accum* sm) {
    MethodRow row;
    row.method = l.method;
    row.checkpoint = l.path;
    row.present = static_cast<bool>(l.gen);
    row.note = l.note;
    if (row.present) {
      row.relight_mse = rm.mean();
      row.relight_dssim = rd.mean();
      if (sm) row.shadow_mse = sm->mean();
    }
    return row;
  };
  r.rows.push_back(learned_row(p2p, p2p_r, p2p_d, nullptr));
  r.rows.push_back(learned_row(two_d, two_r, two_d_d, &two_s));
  MethodRow direct;
  direct.method = "direct";
  direct.checkpoint = ours.gen ? cfg.ckpt_our : "";
  direct.note = "tau=" + fmt(r.tau, "%.6g") +
                (ours.gen ? "; relighter from the ours checkpoint" : "; relight columns need the ours checkpoint");
  direct.shadow_mse = dir_s.mean();
  direct.relight_mse = dir_r.mean();
  direct.relight_dssim = dir_d.mean();
  r.rows.push_back(direct);
  r.rows.push_back(learned_row(ours, our_r, our_d, &our_s));
  return r;
}

nlohmann::json report_to_json(const AblationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j = {{"method", row.method},
                        {"present", row.present},
                        {"note", row.note},
                        {"checkpoint", row.checkpoint},
                        {"relight_dssim", opt_json(row.relight_dssim)},
                        {"relight_mse", opt_json(row.relight_mse)}};
    // The no-shadow baseline has no shadow column at all.
    if (row.method != "pix2pix") j["shadow_mse"] = opt_json(row.shadow_mse);
    rows.push_back(j);
  }
  nlohmann::json out = {{"dataset", r.dataset_id},
                        {"config", r.config},
                        {"tau", r.tau},
                        {"images", r.images.size()},
                        {"lpips", "omitted: needs a pretrained perceptual network"},
                        {"rows", rows}};
  if (r.sweep) out["tau_sweep"] = {{"taus", r.sweep->taus}, {"mean_iou", r.sweep->mean_iou}};
  return out;
}

std::string report_table(const AblationReport& r) {
  std::ostringstream os;
  os << "dataset " << r.dataset_id << ", test split, estimated depth, tau " << fmt(r.tau, "%.4g") << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %14s %14s %14s\n", "method", "relight DSSIM", "relight MSE",
                "shadow MSE");
  os << line;
  auto cell = [](const std::optional<double>& v) { return v ? fmt(*v, "%.5f") : std::string("---"); };
  for (const auto& row : r.rows) {
    if (!row.present) {
      std::snprintf(line, sizeof line, "%-10s %s\n", row.method.c_str(), row.note.c_str());
    } else {
      std::snprintf(line, sizeof line, "%-10s %14s %14s %14s\n", row.method.c_str(),
                    cell(row.relight_dssim).c_str(), cell(row.relight_mse).c_str(),
                    cell(row.shadow_mse).c_str());
    }
    os << line;
  }
  os << "LPIPS omitted (needs a pretrained perceptual network)\n";
  return os.str();
}

std::string report_csv(const AblationReport& r) {
  std::ostringstream os;
  os << "scene,view,light_old,light_new,method,relight_mse,relight_dssim,shadow_mse\n";
  for (const auto& i : r.images) {
    os << i.scene << ',' << i.view << ',' << i.light_old << ',' << i.light_new << ',' << i.method << ','
       << opt_csv(i.relight_mse) << ',' << opt_csv(i.relight_dssim) << ',' << opt_csv(i.shadow_mse)
       << '\n';
  }
  return os.str();
}

}  // namespace relight::eval
