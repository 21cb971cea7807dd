#include "relight/train/config.hpp"

#include <cmath>
#include <fstream>

namespace relight::train {

void TrainConfig::validate() const {
  for (double l : {lambda_c, lambda_s, lambda_r, lambda_a}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("loss weights must be finite and >= 0");
  }
  if (!(p_gt >= 0.0 && p_gt <= 1.0)) throw ValidationError("p_gt must lie in [0,1]");
  if (!(lr > 0.0)) throw ValidationError("lr must be positive");
  if (gen_steps_per_disc < 1) throw ValidationError("gen_steps_per_disc must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (crop != model.width || crop != model.height) {
    throw ValidationError("crop must equal the model frame (" + std::to_string(model.width) + ")");
  }
  if (!(light_noise_deg >= 0.0)) throw ValidationError("light_noise_deg must be >= 0");
  if (epochs < 0 || max_steps < 0) throw ValidationError("epochs/max_steps must be >= 0");
  model.validate();
}

void to_json(nlohmann::json& j, const AugmentConfig& c) {
  j = {{"exposure_stops", c.exposure_stops}, {"saturation", c.saturation}, {"gamma", c.gamma}};
}

void from_json(const nlohmann::json& j, AugmentConfig& c) {
  c.exposure_stops = j.value("exposure_stops", c.exposure_stops);
  c.saturation = j.value("saturation", c.saturation);
  c.gamma = j.value("gamma", c.gamma);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"lambda_c", c.lambda_c},
       {"lambda_s", c.lambda_s},
       {"lambda_r", c.lambda_r},
       {"lambda_a", c.lambda_a},
       {"lr", c.lr},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"eps", c.eps},
       {"gen_steps_per_disc", c.gen_steps_per_disc},
       {"batch_size", c.batch_size},
       {"crop", c.crop},
       {"p_gt", c.p_gt},
       {"light_noise_deg", c.light_noise_deg},
       {"epochs", c.epochs},
       {"seed", c.seed},
       {"method", models::method_name(c.method)},
       {"model", c.model},
       {"corruption", c.corruption},
       {"augment", c.augment},
       {"max_steps", c.max_steps},
       {"log_every", c.log_every},
       {"eval_every", c.eval_every},
       {"checkpoint_every", c.checkpoint_every},
       {"eval_views", c.eval_views},
       {"direct_tau", c.direct_tau}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.lambda_c = j.value("lambda_c", c.lambda_c);
  c.lambda_s = j.value("lambda_s", c.lambda_s);
  c.lambda_r = j.value("lambda_r", c.lambda_r);
  c.lambda_a = j.value("lambda_a", c.lambda_a);
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.gen_steps_per_disc = j.value("gen_steps_per_disc", c.gen_steps_per_disc);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.crop = j.value("crop", c.crop);
  c.p_gt = j.value("p_gt", c.p_gt);
  c.light_noise_deg = j.value("light_noise_deg", c.light_noise_deg);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("method")) c.method = models::method_from_name(j.at("method").get<std::string>());
  if (j.contains("model")) {
    // Partial model blocks override individual fields.
    nlohmann::json m = c.model;
    m.update(j.at("model"));
    c.model = m.get<models::ModelConfig>();
  }
  if (j.contains("corruption")) {
    nlohmann::json m = c.corruption;
    m.update(j.at("corruption"));
    c.corruption = m.get<scene::CorruptionConfig>();
  }
  if (j.contains("augment")) c.augment = j.at("augment").get<AugmentConfig>();
  c.max_steps = j.value("max_steps", c.max_steps);
  c.log_every = j.value("log_every", c.log_every);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.eval_views = j.value("eval_views", c.eval_views);
  c.direct_tau = j.value("direct_tau", c.direct_tau);
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad config JSON: ") + e.what(), e.byte);
  }
  TrainConfig c = j.get<TrainConfig>();
  c.validate();
  return c;
}

}  // namespace relight::train
