#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "relight/models/networks.hpp"
#include "relight/models/pipeline.hpp"
#include "relight/scene/corrupt.hpp"

namespace relight::train {

/// Tone-mapping augmentation shared by the old and new colors of a pair.
/// Each factor is drawn uniformly in [-range, range]; zero ranges are the
/// identity.
struct AugmentConfig {
  double exposure_stops = 0.5;  // multiply by 2^u
  double saturation = 0.2;      // chroma scaled by 1 + u
  double gamma = 0.1;           // c -> c^(1 + u)

  bool identity() const { return exposure_stops == 0.0 && saturation == 0.0 && gamma == 0.0; }
  bool operator==(const AugmentConfig&) const = default;
};

struct TrainConfig {
  // Loss weights.
  double lambda_c = 10.0;
  double lambda_s = 2.0;
  double lambda_r = 10.0;
  double lambda_a = 0.1;

  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int gen_steps_per_disc = 5;
  int batch_size = 4;
  int crop = 64;                  // full toy frame
  double p_gt = 0.8;              // depth coin: GT depth for the new-direction volume
  double light_noise_deg = 3.0;   // angular sigma on l_old
  int epochs = 30;
  std::uint64_t seed = 1;

  models::Method method = models::Method::ours;
  models::ModelConfig model;
  scene::CorruptionConfig corruption;
  AugmentConfig augment;

  int max_steps = 0;         // 0: epochs * steps_per_epoch
  int log_every = 10;
  int eval_every = 500;      // 0 disables periodic eval
  int checkpoint_every = 500;
  int eval_views = 16;       // validation views used by periodic eval
  double direct_tau = 0.05;  // Direct baseline threshold in the metrics log

  void validate() const;
};

void to_json(nlohmann::json& j, const AugmentConfig& c);
void from_json(const nlohmann::json& j, AugmentConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, TrainConfig& c);

TrainConfig load_train_config(const std::string& path);

}  // namespace relight::train
