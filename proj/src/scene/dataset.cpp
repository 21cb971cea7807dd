#include "relight/scene/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "relight/errors.hpp"
#include "relight/raster/image_io.hpp"
#include "relight/scene/render.hpp"

namespace relight::scene {

namespace fs = std::filesystem;

const char* split_name(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

Split split_from_name(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ValidationError("unknown split '" + s + "'");
}

std::vector<const ViewEntry*> Manifest::split(Split s) const {
  std::vector<const ViewEntry*> out;
  for (const ViewEntry& v : views) {
    if (v.split == s) out.push_back(&v);
  }
  return out;
}

std::size_t Manifest::light_count() const {
  std::size_t n = 0;
  for (const ViewEntry& v : views) n += v.lights.size();
  return n;
}

namespace {

nlohmann::json config_json(const DatasetConfig& c) {
  const SceneSamplerConfig& s = c.sampler;
  return {{"scenes", c.scenes},
          {"val_scenes", c.val_scenes},
          {"test_scenes", c.test_scenes},
          {"views", c.views},
          {"lights", c.lights},
          {"width", c.width},
          {"height", c.height},
          {"seed", c.seed},
          {"sampler",
           {{"min_objects", s.min_objects},
            {"max_objects", s.max_objects},
            {"layout_radius", s.layout_radius},
            {"cam_distance", {s.min_cam_distance, s.max_cam_distance}},
            {"pitch_deg", {s.min_pitch_deg, s.max_pitch_deg}},
            {"fov_deg", {s.min_fov_deg, s.max_fov_deg}},
            {"sun_elevation_deg", {s.min_sun_elevation_deg, s.max_sun_elevation_deg}},
            {"sun_azimuth", "uniform"}}}};
}

DatasetConfig config_from_json(const nlohmann::json& j) {
  DatasetConfig c;
  c.scenes = j.at("scenes").get<int>();
  c.val_scenes = j.at("val_scenes").get<int>();
  c.test_scenes = j.at("test_scenes").get<int>();
  c.views = j.at("views").get<int>();
  c.lights = j.at("lights").get<int>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& s = j.at("sampler");
  c.sampler.width = c.width;
  c.sampler.height = c.height;
  c.sampler.min_objects = s.at("min_objects").get<int>();
  c.sampler.max_objects = s.at("max_objects").get<int>();
  c.sampler.layout_radius = s.at("layout_radius").get<double>();
  c.sampler.min_cam_distance = s.at("cam_distance").at(0).get<double>();
  c.sampler.max_cam_distance = s.at("cam_distance").at(1).get<double>();
  c.sampler.min_pitch_deg = s.at("pitch_deg").at(0).get<double>();
  c.sampler.max_pitch_deg = s.at("pitch_deg").at(1).get<double>();
  c.sampler.min_fov_deg = s.at("fov_deg").at(0).get<double>();
  c.sampler.max_fov_deg = s.at("fov_deg").at(1).get<double>();
  c.sampler.min_sun_elevation_deg = s.at("sun_elevation_deg").at(0).get<double>();
  c.sampler.max_sun_elevation_deg = s.at("sun_elevation_deg").at(1).get<double>();
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

std::string stem(int scene, int view) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "s%03d_v%02d", scene, view);
  return buf;
}

}  // namespace

nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json views = nlohmann::json::array();
  for (const ViewEntry& v : m.views) {
    nlohmann::json lights = nlohmann::json::array();
    for (const LightEntry& l : v.lights) {
      nlohmann::json dir;
      to_json(dir, l.direction);
      lights.push_back({{"index", l.index},
                        {"direction", dir},
                        {"world_azimuth_deg", l.world_azimuth_deg},
                        {"world_elevation_deg", l.world_elevation_deg},
                        {"level_azimuth_deg", l.level_azimuth_deg},
                        {"level_elevation_deg", l.level_elevation_deg},
                        {"color", l.color},
                        {"shadow", l.shadow}});
    }
    nlohmann::json cam = v.camera;
    cam["pitch_deg"] = v.pitch_deg;
    views.push_back({{"scene", v.scene},
                     {"view", v.view},
                     {"split", split_name(v.split)},
                     {"spec", v.spec},
                     {"depth", v.depth},
                     {"camera", cam},
                     {"lights", lights}});
  }
  return {{"version", m.version}, {"config", config_json(m.config)}, {"views", views}};
}

Manifest manifest_from_json(const nlohmann::json& j, const fs::path& root) {
  Manifest m;
  m.root = root;
  m.version = j.at("version").get<int>();
  if (m.version != kManifestVersion) {
    throw ValidationError("unsupported manifest version " + std::to_string(m.version));
  }
  m.config = config_from_json(j.at("config"));
  for (const auto& jv : j.at("views")) {
    ViewEntry v;
    v.scene = jv.at("scene").get<int>();
    v.view = jv.at("view").get<int>();
    v.split = split_from_name(jv.at("split").get<std::string>());
    v.spec = jv.at("spec").get<std::string>();
    v.depth = jv.at("depth").get<std::string>();
    v.camera = jv.at("camera").get<CameraModel>();
    v.pitch_deg = jv.at("camera").value("pitch_deg", 0.0);
    for (const auto& jl : jv.at("lights")) {
      LightEntry l;
      l.index = jl.at("index").get<int>();
      l.direction = light_from_json(jl.at("direction"));
      l.world_azimuth_deg = jl.at("world_azimuth_deg").get<double>();
      l.world_elevation_deg = jl.at("world_elevation_deg").get<double>();
      l.level_azimuth_deg = jl.at("level_azimuth_deg").get<double>();
      l.level_elevation_deg = jl.at("level_elevation_deg").get<double>();
      l.color = jl.at("color").get<std::string>();
      l.shadow = jl.at("shadow").get<std::string>();
      v.lights.push_back(std::move(l));
    }
    m.views.push_back(std::move(v));
  }
  return m;
}

Manifest make_dataset(const DatasetConfig& cfg, const fs::path& out_dir) {
  if (cfg.scenes <= 0 || cfg.views <= 0 || cfg.lights <= 0) {
    throw ValidationError("dataset needs positive scene, view and light counts");
  }
  if (cfg.val_scenes < 0 || cfg.test_scenes < 0 || cfg.val_scenes + cfg.test_scenes > cfg.scenes) {
    throw ValidationError("held-out scene counts exceed the total");
  }
  std::error_code ec;
  fs::create_directories(out_dir / "scenes", ec);
  fs::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  SceneSamplerConfig sampler = cfg.sampler;
  sampler.width = cfg.width;
  sampler.height = cfg.height;

  Manifest m;
  m.config = cfg;
  m.config.sampler = sampler;
  m.root = out_dir;
  const int n_train = cfg.scenes - cfg.val_scenes - cfg.test_scenes;
  for (int s = 0; s < cfg.scenes; ++s) {
    const Split split = s < n_train                    ? Split::train
                        : s < n_train + cfg.val_scenes ? Split::val
                                                       : Split::test;
    for (int v = 0; v < cfg.views; ++v) {
      const SceneSpec spec = cull_offscreen(sample_scene(sampler, cfg.seed, s, v, cfg.lights));
      const std::string base = stem(s, v);
      ViewEntry ve;
      ve.scene = s;
      ve.view = v;
      ve.split = split;
      ve.spec = "scenes/" + base + ".json";
      ve.depth = "images/" + base + "_depth.pfm";
      ve.camera = spec.camera.intrinsics;
      ve.pitch_deg = spec.camera.pose.pitch_deg;
      write_text(out_dir / ve.spec, nlohmann::json(spec).dump(1) + "\n");
      for (int k = 0; k < cfg.lights; ++k) {
        const RenderedSample r = render(spec, k);
        if (k == 0) write_image(r.depth, out_dir / ve.depth, ImageFormat::pfm);
        LightEntry le;
        le.index = k;
        le.direction = r.light;
        le.world_azimuth_deg = spec.lights[static_cast<std::size_t>(k)].azimuth_deg;
        le.world_elevation_deg = spec.lights[static_cast<std::size_t>(k)].elevation_deg;
        const LightAngles a = light_angles(r.light, ve.pitch_deg);
        le.level_azimuth_deg = a.azimuth_deg;
        le.level_elevation_deg = a.elevation_deg;
        le.color = "images/" + base + "_l" + std::to_string(k) + "_color.pfm";
        le.shadow = "images/" + base + "_l" + std::to_string(k) + "_shadow.pfm";
        try {
          write_image(r.color, out_dir / le.color, ImageFormat::pfm);
          write_image(r.shadow, out_dir / le.shadow, ImageFormat::pfm);
        } catch (const std::exception& e) {
          throw IoError(std::string("dataset ") + base + " light " + std::to_string(k) + ": " +
                        e.what());
        }
        ve.lights.push_back(std::move(le));
      }
      m.views.push_back(std::move(ve));
    }
  }
  write_text(out_dir / "manifest.json", manifest_to_json(m).dump(1) + "\n");
  return m;
}

Manifest load_manifest(const fs::path& dir) {
  const fs::path p = dir / "manifest.json";
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what(), e.byte);
  }
  return manifest_from_json(j, dir);
}

ViewImages load_view(const Manifest& m, const ViewEntry& v) {
  ViewImages out{read_depth(m.root / v.depth), {}, {}};
  for (const LightEntry& l : v.lights) {
    out.colors.push_back(read_color(m.root / l.color));
    out.shadows.push_back(read_shadow(m.root / l.shadow));
  }
  return out;
}

}  // namespace relight::scene
