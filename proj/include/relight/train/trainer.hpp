#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "relight/eval/ablation.hpp"
#include "relight/models/losses.hpp"
#include "relight/nn/adam.hpp"
#include "relight/train/sampler.hpp"

namespace relight::train {

using nn::Tensor;

/// Bernoulli(p_gt) draw deciding whether the new-direction volume of this
/// step is built from ground-truth depth.
bool flip_depth_coin(double p_gt, std::mt19937_64& rng);

struct Batch {
  std::vector<TrainingExample> examples;
  bool gt_depth = false;
  models::GeneratorInputs inputs;
  Tensor<float> shadow_old;   // (N,1,H,W) ground truth
  Tensor<float> shadow_new;
  Tensor<float> color_new;    // (N,3,H,W)

  std::string describe() const;  // view/light ids for diagnostics
};

Batch batch_from_examples(std::vector<TrainingExample> examples, bool gt_depth, const TrainConfig& cfg);
/// Coin first, then batch_size draws from the train split.
Batch sample_batch(const scene::Manifest& m, std::mt19937_64& rng, const TrainConfig& cfg);

struct LossReport {
  std::int64_t step = 0;
  double total = 0.0;   // value of the optimized scalar
  double l_c = 0.0;     // new-direction shadow MSE
  double l_s = 0.0;     // refined old shadow MSE
  double l_r = 0.0;     // relit color MSE
  double l_a = 0.0;     // generator LSGAN term
  std::optional<double> disc;  // discriminator loss when D stepped
  bool gt_depth = false;
};

nlohmann::json to_json(const LossReport& r);

struct EvalMetrics {
  std::int64_t step = 0;
  std::optional<double> shadow_mse;
  std::optional<double> shadow_dssim;
  double relight_mse = 0.0;
  double direct_shadow_mse = 0.0;
  double direct_tau = 0.0;
  std::size_t images = 0;
};

nlohmann::json to_json(const EvalMetrics& e);

/// Squared L2 norm of every parameter gradient (0 when no buffer exists).
double grad_norm_sq(const nn::Module<float>& m);

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, scene::Manifest manifest);

  const TrainConfig& config() const { return cfg_; }
  models::Generator& generator() { return *gen_; }
  models::PatchDiscriminator<float>& discriminator() { return *disc_; }
  std::int64_t steps_done() const { return steps_; }
  int steps_per_epoch() const;
  std::int64_t total_steps() const;

  /// Weighted-loss step on a given batch: one Adam step on the generator, plus a
  /// discriminator step on every gen_steps_per_disc-th call when lambda_a > 0.
  /// Throws std::runtime_error naming the batch on a non-finite loss.
  LossReport train_step(const Batch& b);
  /// Samples a batch from the trainer's stream, then train_step.
  LossReport step();

  /// Shadow/relight metrics on the fixed validation subset.
  EvalMetrics evaluate();

  void save(const std::filesystem::path& path) const;
  /// Restores weights, optimizer moments, counters and the sampling stream.
  /// Refuses a checkpoint whose model config or method differs, listing the
  /// differing fields.
  void resume(const std::filesystem::path& path);

  /// Trains to total_steps(), writing metrics.jsonl, latest.ckpt at the
  /// checkpoint interval and final.ckpt under `out_dir`.
  void run(const std::filesystem::path& out_dir, std::ostream* progress = nullptr);

 private:
  TrainConfig cfg_;
  scene::Manifest manifest_;
  std::unique_ptr<models::Generator> gen_;
  std::unique_ptr<models::PatchDiscriminator<float>> disc_;
  std::unique_ptr<nn::Adam<float>> opt_g_;
  std::unique_ptr<nn::Adam<float>> opt_d_;
  std::mt19937_64 rng_;
  std::int64_t steps_ = 0;
  std::int64_t calls_ = 0;
  std::vector<eval::EvalSample> eval_set_;
  std::optional<double> direct_mse_;
};

}  // namespace relight::train
