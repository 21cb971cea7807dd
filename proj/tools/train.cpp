// Trains one method (ours, 2d or pix2pix) on a scenegen dataset.
#include <Eigen/Core>
#include <iostream>

#include "CLI11.hpp"
#include "relight/train/trainer.hpp"

int main(int argc, char** argv) {
  std::string data, config, out, resume, method;
  bool deterministic = false, quiet = false;
  long long seed = -1, max_steps = -1;
  CLI::App app{"Train the shadow and relighting networks"};
  app.add_option("--data", data, "dataset directory")->required();
  app.add_option("--config", config, "run-config JSON (missing keys keep defaults)");
  app.add_option("--out", out, "run directory")->required();
  app.add_option("--resume", resume, "training-state checkpoint to continue from");
  app.add_flag("--deterministic", deterministic, "single-threaded, serial loading");
  app.add_option("--method", method, "override: ours, 2d or pix2pix");
  app.add_option("--seed", seed, "override the run seed");
  app.add_option("--max-steps", max_steps, "override the step budget");
  app.add_flag("--quiet", quiet, "no progress lines on stdout");
  CLI11_PARSE(app, argc, argv);
  try {
    relight::train::TrainConfig cfg;
    if (!config.empty()) cfg = relight::train::load_train_config(config);
    if (!method.empty()) cfg.method = relight::models::method_from_name(method);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (max_steps >= 0) cfg.max_steps = static_cast<int>(max_steps);
    cfg.validate();
    if (deterministic) Eigen::setNbThreads(1);
    relight::train::Trainer trainer(cfg, relight::scene::load_manifest(data));
    if (!resume.empty()) trainer.resume(resume);
    trainer.run(out, quiet ? nullptr : &std::cout);
  } catch (const relight::ValidationError& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
