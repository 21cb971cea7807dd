// Four-way ablation report on the test split.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "relight/eval/ablation.hpp"

int main(int argc, char** argv) {
  relight::eval::AblationConfig cfg;
  std::string data, sweep, out;
  CLI::App app{"Relighting ablation: pix2pix-like, 2D, direct, ours"};
  app.add_option("--data", data, "dataset directory")->required();
  app.add_option("--ckpt-our", cfg.ckpt_our, "checkpoint of the full method");
  app.add_option("--ckpt-2d", cfg.ckpt_2d, "checkpoint of the 2D shadow ablation");
  app.add_option("--ckpt-p2p", cfg.ckpt_p2p, "checkpoint of the no-shadow relighter");
  app.add_option("--tau-sweep", sweep, "direct threshold grid lo:hi:n, tuned on the val split");
  app.add_option("--tau", cfg.tau, "fixed direct threshold when no sweep is given");
  app.add_option("--max-views", cfg.max_views, "limit views per split (0 = all)");
  app.add_option("--out", out, "directory for report.json, report.txt, per_image.csv");
  CLI11_PARSE(app, argc, argv);
  try {
    if (!sweep.empty()) cfg.tau_grid = relight::eval::parse_tau_grid(sweep);
    const auto report = relight::eval::run_ablation(relight::scene::load_manifest(data), cfg);
    const std::string table = relight::eval::report_table(report);
    std::cout << table;
    if (!out.empty()) {
      std::filesystem::create_directories(out);
      std::ofstream(std::filesystem::path(out) / "report.json") << relight::eval::report_to_json(report).dump(2) << "\n";
      std::ofstream(std::filesystem::path(out) / "report.txt") << table;
      std::ofstream(std::filesystem::path(out) / "per_image.csv") << relight::eval::report_csv(report);
    }
  } catch (const relight::ValidationError& e) {
    std::cerr << "evalbench: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "evalbench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
