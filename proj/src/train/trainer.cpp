#include "relight/train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "relight/eval/metrics.hpp"
#include "relight/nn/checkpoint.hpp"

namespace relight::train {

namespace {

using Tf = Tensor<float>;

Tf stack(const std::vector<Tf>& xs) { return xs.size() == 1 ? xs.front() : nn::concat(xs, 0); }

void append_moments(nn::Checkpoint& c, const std::string& prefix, nn::Adam<float>& opt) {
  const auto& ps = opt.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    c.tensors.push_back({prefix + "m." + ps[i].name, ps[i].tensor.shape(), opt.m()[i]});
    c.tensors.push_back({prefix + "v." + ps[i].name, ps[i].tensor.shape(), opt.v()[i]});
  }
}

void load_moments(const nn::Checkpoint& c, const std::string& prefix, nn::Adam<float>& opt) {
  const auto& ps = opt.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& m = c.at(prefix + "m." + ps[i].name);
    const auto& v = c.at(prefix + "v." + ps[i].name);
    if (m.data.size() != opt.m()[i].size() || v.data.size() != opt.v()[i].size()) {
      throw ValidationError("optimizer state size mismatch for " + ps[i].name);
    }
    opt.m()[i] = m.data;
    opt.v()[i] = v.data;
  }
}

std::string describe_diff(const nlohmann::json& saved, const nlohmann::json& current) {
  std::string out;
  for (const auto& op : nlohmann::json::diff(saved, current)) {
    const std::string path = op.at("path").get<std::string>();
    const auto ptr = nlohmann::json::json_pointer(path);
    out += "\n  " + path + ": checkpoint " + (saved.contains(ptr) ? saved.at(ptr).dump() : "<absent>") +
           ", config " + (current.contains(ptr) ? current.at(ptr).dump() : "<absent>");
  }
  return out;
}

}  // namespace

bool flip_depth_coin(double p_gt, std::mt19937_64& rng) {
  return std::bernoulli_distribution(p_gt)(rng);
}

std::string Batch::describe() const {
  std::string s = gt_depth ? "gt-depth batch:" : "estimated-depth batch:";
  for (const auto& e : examples) {
    s += " [view " + std::to_string(e.view_index) + " lights " + std::to_string(e.light_old) + "->" +
         std::to_string(e.light_new) + "]";
  }
  return s;
}

Batch batch_from_examples(std::vector<TrainingExample> examples, bool gt_depth, const TrainConfig& cfg) {
  if (examples.empty()) throw ValidationError("empty batch");
  Batch b;
  b.gt_depth = gt_depth;
  std::vector<models::GeneratorInputs> ins;
  std::vector<Tf> so, sn, cn;
  for (const auto& e : examples) {
    // Old-direction inputs and normals always come from the estimated depth.
    ins.push_back(models::make_inputs(e.color_old, e.depth_corrupted,
                                      gt_depth ? e.depth_gt : e.depth_corrupted, e.camera, e.l_old,
                                      e.l_new, cfg.model, cfg.method));
    so.push_back(models::to_tensor(e.shadow_old.raster()));
    sn.push_back(models::to_tensor(e.shadow_new.raster()));
    cn.push_back(models::to_tensor(e.color_new.raster()));
  }
  b.inputs = models::stack_inputs(ins);
  b.shadow_old = stack(so);
  b.shadow_new = stack(sn);
  b.color_new = stack(cn);
  b.examples = std::move(examples);
  return b;
}

Batch sample_batch(const scene::Manifest& m, std::mt19937_64& rng, const TrainConfig& cfg) {
  const bool gt = flip_depth_coin(cfg.p_gt, rng);
  std::vector<TrainingExample> ex;
  for (int i = 0; i < cfg.batch_size; ++i) ex.push_back(sample_pair(m, rng, cfg));
  return batch_from_examples(std::move(ex), gt, cfg);
}

nlohmann::json to_json(const LossReport& r) {
  nlohmann::json j = {{"type", "train"}, {"step", r.step}, {"total", r.total}, {"l_c", r.l_c},
                      {"l_s", r.l_s},    {"l_r", r.l_r},   {"l_a", r.l_a},     {"gt_depth", r.gt_depth}};
  if (r.disc) j["disc"] = *r.disc;
  return j;
}

nlohmann::json to_json(const EvalMetrics& e) {
  nlohmann::json j = {{"type", "eval"},
                      {"step", e.step},
                      {"relight_mse", e.relight_mse},
                      {"direct_shadow_mse", e.direct_shadow_mse},
                      {"direct_tau", e.direct_tau},
                      {"images", e.images}};
  if (e.shadow_mse) j["shadow_mse"] = *e.shadow_mse;
  if (e.shadow_dssim) j["shadow_dssim"] = *e.shadow_dssim;
  return j;
}

double grad_norm_sq(const nn::Module<float>& m) {
  double s = 0.0;
  for (const auto& p : m.parameters()) {
    if (!p.tensor.has_grad()) continue;
    for (float g : p.tensor.grad()) s += static_cast<double>(g) * g;
  }
  return s;
}

Trainer::Trainer(const TrainConfig& cfg, scene::Manifest manifest)
    : cfg_(cfg), manifest_(std::move(manifest)), rng_(scene::derive_seed(cfg.seed, 11)) {
  cfg_.validate();
  if (manifest_.config.width != cfg_.model.width || manifest_.config.height != cfg_.model.height) {
    throw ValidationError("dataset frames are " + std::to_string(manifest_.config.width) + "x" +
                          std::to_string(manifest_.config.height) + ", model expects " +
                          std::to_string(cfg_.model.width) + "x" + std::to_string(cfg_.model.height));
  }
  if (manifest_.config.lights < 2) throw ValidationError("training pairs need at least 2 lights per view");
  gen_ = std::make_unique<models::Generator>(cfg_.model, cfg_.method, scene::derive_seed(cfg_.seed, 12));
  std::mt19937_64 drng(scene::derive_seed(cfg_.seed, 13));
  disc_ = std::make_unique<models::PatchDiscriminator<float>>(cfg_.model, drng);
  const nn::AdamConfig ac{cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps};
  opt_g_ = std::make_unique<nn::Adam<float>>(gen_->parameters(), ac);
  opt_d_ = std::make_unique<nn::Adam<float>>(disc_->parameters(), ac);
}

int Trainer::steps_per_epoch() const {
  const auto n = static_cast<int>(manifest_.split(scene::Split::train).size());
  return std::max(1, (n + cfg_.batch_size - 1) / cfg_.batch_size);
}

std::int64_t Trainer::total_steps() const {
  if (cfg_.max_steps > 0) return cfg_.max_steps;
  return static_cast<std::int64_t>(cfg_.epochs) * steps_per_epoch();
}

LossReport Trainer::train_step(const Batch& b) {
  ++calls_;
  LossReport r;
  r.gt_depth = b.gt_depth;
  gen_->zero_grad();
  disc_->zero_grad();

  const models::GeneratorOutputs out = gen_->forward(b.inputs);
  std::vector<std::pair<double, Tf>> terms;
  const bool has_shadow = cfg_.method != models::Method::pix2pix;
  const Tf cond_shadow = has_shadow ? nn::detach(out.s_new) : Tf(b.shadow_new.shape(), 0.0f);
  if (has_shadow) {
    const Tf lc = nn::mse(out.s_new, b.shadow_new);
    const Tf ls = nn::mse(out.s_old, b.shadow_old);
    r.l_c = lc.item();
    r.l_s = ls.item();
    terms.emplace_back(cfg_.lambda_c, lc);
    terms.emplace_back(cfg_.lambda_s, ls);
  }
  const Tf lr = nn::mse(out.relit, b.color_new);
  r.l_r = lr.item();
  terms.emplace_back(cfg_.lambda_r, lr);
  if (cfg_.lambda_a > 0.0) {
    const Tf la = models::lsgan_generator_loss(*disc_, out.relit, b.inputs.color, cond_shadow);
    r.l_a = la.item();
    terms.emplace_back(cfg_.lambda_a, la);
  }

  // Zero-weight terms stay out of the graph so they send no gradient.
  Tf total;
  for (const auto& [w, t] : terms) {
    if (w == 0.0) continue;
    const Tf wt = nn::mul_scalar(t, static_cast<float>(w));
    total = total.defined() ? nn::add(total, wt) : wt;
  }
  r.total = total.defined() ? static_cast<double>(total.item()) : 0.0;
  for (double v : {r.total, r.l_c, r.l_s, r.l_r, r.l_a}) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("non-finite loss at step " + std::to_string(steps_ + 1) + " (" +
                               to_json(r).dump() + "); " + b.describe());
    }
  }
  if (total.defined() && total.requires_grad()) {
    total.backward();
    opt_g_->step();
  }

  if (cfg_.lambda_a > 0.0 && calls_ % cfg_.gen_steps_per_disc == 0) {
    disc_->zero_grad();
    const Tf ld = models::lsgan_discriminator_loss(*disc_, b.color_new, out.relit, b.inputs.color,
                                                   cond_shadow);
    r.disc = ld.item();
    if (!std::isfinite(*r.disc)) {
      throw std::runtime_error("non-finite discriminator loss at step " + std::to_string(steps_ + 1) +
                               "; " + b.describe());
    }
    ld.backward();
    opt_d_->step();
  }
  r.step = ++steps_;
  return r;
}

LossReport Trainer::step() { return train_step(sample_batch(manifest_, rng_, cfg_)); }

EvalMetrics Trainer::evaluate() {
  if (eval_set_.empty()) {
    for (const auto& p : eval::eval_pairs(manifest_, scene::Split::val, cfg_.eval_views)) {
      eval_set_.push_back(eval::load_eval_sample(manifest_, p, cfg_.corruption));
    }
    if (eval_set_.empty()) throw ValidationError("validation split is empty");
  }
  EvalMetrics m;
  m.step = steps_;
  m.direct_tau = cfg_.direct_tau;
  m.images = eval_set_.size();
  double s_mse = 0, s_dssim = 0, r_mse = 0, d_mse = 0;
  const bool compute_direct = !direct_mse_;
  for (const auto& e : eval_set_) {
    const models::PreparedView pv(e.color_old, e.depth_est, e.camera);
    const auto out = models::relight_image(*gen_, pv, e.l_old, e.l_new);
    r_mse += eval::mse(out.relit, e.color_new);
    if (out.s_new) {
      s_mse += eval::mse(*out.s_new, e.shadow_new);
      s_dssim += eval::dssim(out.s_new->raster(), e.shadow_new.raster());
    }
    if (compute_direct) {
      d_mse += eval::mse(models::direct_shadow_image(pv, e.l_new, 256, cfg_.direct_tau), e.shadow_new);
    }
  }
  const double n = static_cast<double>(eval_set_.size());
  if (compute_direct) direct_mse_ = d_mse / n;
  m.direct_shadow_mse = *direct_mse_;
  m.relight_mse = r_mse / n;
  if (cfg_.method != models::Method::pix2pix) {
    m.shadow_mse = s_mse / n;
    m.shadow_dssim = s_dssim / n;
  }
  return m;
}

void Trainer::save(const std::filesystem::path& path) const {
  nn::Checkpoint c;
  std::ostringstream rng_state;
  rng_state << rng_;
  c.meta = models::model_meta(cfg_.model, cfg_.method);
  c.meta["kind"] = "train_state";
  c.meta["train_config"] = cfg_;
  c.meta["step"] = steps_;
  c.meta["calls"] = calls_;
  c.meta["rng"] = rng_state.str();
  c.meta["adam_g_steps"] = opt_g_->steps();
  c.meta["adam_d_steps"] = opt_d_->steps();
  c.meta["dataset"] = eval::dataset_id(manifest_);
  nn::append_params(c, "gen.", gen_->parameters());
  nn::append_params(c, "disc.", disc_->parameters());
  append_moments(c, "adam_g.", *opt_g_);
  append_moments(c, "adam_d.", *opt_d_);
  nn::save_checkpoint(path, c);
  auto side = path;
  side.replace_extension(".json");
  std::ofstream f(side);
  if (!f) throw IoError("cannot write " + side.string());
  f << models::model_meta(cfg_.model, cfg_.method).dump(2) << '\n';
}

void Trainer::resume(const std::filesystem::path& path) {
  const nn::Checkpoint c = nn::load_checkpoint(path);
  const nlohmann::json current = models::model_meta(cfg_.model, cfg_.method);
  const nlohmann::json saved = {{"model_config", c.meta.value("model_config", nlohmann::json())},
                                {"method", c.meta.value("method", nlohmann::json())}};
  if (saved != current) {
    throw ValidationError("refusing to resume " + path.string() +
                          ": model config differs" + describe_diff(saved, current));
  }
  if (c.meta.value("kind", "") != "train_state") {
    throw ValidationError(path.string() + " holds weights only, not a resumable training state");
  }
  auto gp = gen_->parameters();
  nn::load_params(c, "gen.", gp);
  auto dp = disc_->parameters();
  nn::load_params(c, "disc.", dp);
  load_moments(c, "adam_g.", *opt_g_);
  load_moments(c, "adam_d.", *opt_d_);
  opt_g_->set_steps(c.meta.at("adam_g_steps").get<std::int64_t>());
  opt_d_->set_steps(c.meta.at("adam_d_steps").get<std::int64_t>());
  steps_ = c.meta.at("step").get<std::int64_t>();
  calls_ = c.meta.at("calls").get<std::int64_t>();
  std::istringstream rs(c.meta.at("rng").get<std::string>());
  rs >> rng_;
  if (!rs) throw ParseError("bad sampler state in checkpoint", 0);
}

void Trainer::run(const std::filesystem::path& out_dir, std::ostream* progress) {
  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir / "metrics.jsonl", steps_ > 0 ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write " + (out_dir / "metrics.jsonl").string());
  {
    std::ofstream f(out_dir / "train_config.json");
    f << nlohmann::json(cfg_).dump(2) << '\n';
  }
  const std::int64_t total = total_steps();
  while (steps_ < total) {
    const LossReport r = step();
    if (cfg_.log_every > 0 && (r.step % cfg_.log_every == 0 || r.step == total)) {
      log << to_json(r).dump() << std::endl;
      if (progress) *progress << to_json(r).dump() << '\n';
    }
    if (cfg_.eval_every > 0 && r.step % cfg_.eval_every == 0 && r.step != total) {
      const auto e = to_json(evaluate()).dump();
      log << e << std::endl;
      if (progress) *progress << e << '\n';
    }
    if (cfg_.checkpoint_every > 0 && r.step % cfg_.checkpoint_every == 0) {
      save(out_dir / "latest.ckpt");
    }
  }
  const auto e = to_json(evaluate()).dump();
  log << e << '\n';
  if (progress) *progress << e << '\n';
  save(out_dir / "final.ckpt");
}

}  // namespace relight::train
