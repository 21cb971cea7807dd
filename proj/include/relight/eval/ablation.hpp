#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "relight/models/pipeline.hpp"
#include "relight/scene/corrupt.hpp"
#include "relight/scene/dataset.hpp"

namespace relight::eval {

/// One held-out relighting query: view, source light, target light.
struct EvalPair {
  std::size_t view_index = 0;
  int light_old = 0;
  int light_new = 0;
};

/// Every view of `split` (first `max_views` if > 0) with each light k as
/// source and light (k+1) mod L as target.
std::vector<EvalPair> eval_pairs(const scene::Manifest& m, scene::Split split, int max_views = 0);

struct EvalSample {
  ColorImage color_old;
  ColorImage color_new;
  ShadowImage shadow_old;
  ShadowImage shadow_new;
  DepthMap depth_gt;
  DepthMap depth_est;   // fixed per (view, source light) corruption
  CameraModel camera;
  LightDirection l_old;
  LightDirection l_new;
};

/// Corruption seed is derived from the dataset seed, the view and the
/// source light, so every method sees the same estimated depth.
EvalSample load_eval_sample(const scene::Manifest& m, const EvalPair& p,
                            const scene::CorruptionConfig& corruption);

/// lo:hi:n geometric grid with 0 < lo <= hi (inclusive ends).
std::vector<double> parse_tau_grid(const std::string& spec);

struct TauSweep {
  std::vector<double> taus;
  std::vector<double> mean_iou;
  double best_tau = 0.0;
  double best_iou = 0.0;
};

/// Direct-caster threshold search by mean unlit-mask IoU against the
/// ground-truth shadow over the given samples. Ties keep the smaller tau.
TauSweep sweep_tau(const std::vector<EvalSample>& samples, const std::vector<double>& taus,
                   int steps);

struct AblationConfig {
  std::string ckpt_our;
  std::string ckpt_2d;
  std::string ckpt_p2p;
  std::vector<double> tau_grid;  // empty: use fixed `tau`
  double tau = 0.05;
  int direct_steps = 256;
  int max_views = 0;             // per split, 0 = all
  scene::CorruptionConfig corruption;
};

void to_json(nlohmann::json& j, const AblationConfig& c);

struct MethodRow {
  std::string method;   // "pix2pix", "2d", "direct", "ours"
  bool present = true;
  std::string note;     // skip reason or provenance
  std::string checkpoint;
  std::optional<double> relight_dssim;
  std::optional<double> relight_mse;
  std::optional<double> shadow_mse;
};

struct ImageRow {
  int scene = 0;
  int view = 0;
  int light_old = 0;
  int light_new = 0;
  std::string method;
  std::optional<double> relight_mse;
  std::optional<double> relight_dssim;
  std::optional<double> shadow_mse;
};

struct AblationReport {
  std::string dataset_id;
  nlohmann::json config;
  double tau = 0.0;
  std::optional<TauSweep> sweep;
  std::vector<MethodRow> rows;
  std::vector<ImageRow> images;

  const MethodRow& row(const std::string& method) const;
};

/// Four-way comparison on the test split with estimated (corrupted) depth
/// only. Missing checkpoints produce rows marked absent. The Direct row uses
/// the relighter of the `ours` checkpoint fed with directly cast shadows.
AblationReport run_ablation(const scene::Manifest& m, const AblationConfig& cfg);

nlohmann::json report_to_json(const AblationReport& r);
std::string report_table(const AblationReport& r);
std::string report_csv(const AblationReport& r);

/// Stable identifier of a dataset: manifest seed, counts and size.
std::string dataset_id(const scene::Manifest& m);

}  // namespace relight::eval
