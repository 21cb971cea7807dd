// Offline relighting and shadow queries; same code path as the service.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "relight/raster/image_io.hpp"
#include "relight/service/server.hpp"

namespace svc = relight::service;

int main(int argc, char** argv) {
  std::string color_path, depth_path, camera_path, ckpt, out, mode = "direct";
  double az = 0, el = 45, src_az = 0, src_el = 45, tau = svc::ServiceConfig{}.default_tau;
  bool shadow_only = false;
  CLI::App app{"Relight one image (or cast its shadow) from color + depth + camera"};
  app.add_option("--color", color_path, "color image (PNG or PFM)")->required();
  app.add_option("--depth", depth_path, "depth map (PFM)")->required();
  app.add_option("--camera", camera_path, "camera JSON {fx, fy, cx, cy, pitch_deg}")->required();
  app.add_option("--ckpt", ckpt, "generator checkpoint");
  app.add_option("--out", out, "output PNG")->required();
  app.add_option("--azimuth", az, "target sun azimuth, camera-level frame (deg)");
  app.add_option("--elevation", el, "target sun elevation (deg)");
  app.add_option("--src-azimuth", src_az, "aligned source sun azimuth (deg)");
  app.add_option("--src-elevation", src_el, "aligned source sun elevation (deg)");
  app.add_flag("--shadow", shadow_only, "write the shadow image for the target sun instead");
  app.add_option("--mode", mode, "shadow mode: direct or learned");
  app.add_option("--tau", tau, "direct-mode threshold");
  CLI11_PARSE(app, argc, argv);
  try {
    std::ifstream cf(camera_path);
    if (!cf) throw relight::IoError("cannot open " + camera_path);
    const auto cj = nlohmann::json::parse(cf);
    const double pitch = cj.value("pitch_deg", 0.0);
    const relight::models::PreparedView view(
        relight::color_from_raster(svc::decode_any(relight::read_file_bytes(color_path))),
        relight::read_depth(depth_path), cj.get<relight::CameraModel>());
    std::unique_ptr<relight::models::Generator> gen;
    if (!ckpt.empty()) gen = relight::models::load_generator(ckpt);
    const auto target = svc::light_from_key(svc::light_key(az, el), pitch);
    std::vector<std::uint8_t> png;
    if (shadow_only) {
      const auto m = svc::shadow_mode_from_name(mode);
      if (m == svc::ShadowMode::learned && !gen) throw relight::ValidationError("learned mode needs --ckpt");
      png = svc::shadow_png(view, gen.get(), target, m, tau, svc::ServiceConfig{}.direct_steps);
    } else {
      if (!gen) throw relight::ValidationError("relighting needs --ckpt");
      png = svc::relight_png(view, *gen, svc::light_from_key(svc::light_key(src_az, src_el), pitch), target);
    }
    relight::write_file_bytes(out, png);
  } catch (const relight::ValidationError& e) {
    std::cerr << "relight: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "relight: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
