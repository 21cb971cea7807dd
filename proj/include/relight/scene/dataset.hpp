#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "relight/raster/camera.hpp"
#include "relight/raster/image.hpp"
#include "relight/scene/scene.hpp"

namespace relight::scene {

inline constexpr int kManifestVersion = 1;

struct DatasetConfig {
  int scenes = 80;       // total; the last val_scenes + test_scenes are held out
  int val_scenes = 8;
  int test_scenes = 8;
  int views = 8;
  int lights = 4;
  int width = 64;
  int height = 64;
  std::uint64_t seed = 1;
  SceneSamplerConfig sampler;
};

enum class Split { train, val, test };
const char* split_name(Split s);
Split split_from_name(const std::string& s);

struct LightEntry {
  int index = 0;
  LightDirection direction{{0.0, 0.0, -1.0}};  // camera space
  double world_azimuth_deg = 0.0;
  double world_elevation_deg = 0.0;
  double level_azimuth_deg = 0.0;     // camera-level frame, see LightDirection::from_angles
  double level_elevation_deg = 0.0;
  std::string color;   // relative paths
  std::string shadow;
};

struct ViewEntry {
  int scene = 0;
  int view = 0;
  Split split = Split::train;
  std::string spec;
  std::string depth;
  CameraModel camera;
  double pitch_deg = 0.0;
  std::vector<LightEntry> lights;
};

struct Manifest {
  int version = kManifestVersion;
  DatasetConfig config;
  std::vector<ViewEntry> views;
  std::filesystem::path root;  // not serialized

  std::vector<const ViewEntry*> split(Split s) const;
  std::size_t light_count() const;
};

nlohmann::json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& root);

/// Renders every (scene, view, light) triple under `out_dir` and writes
/// manifest.json. Output bytes depend only on the config.
Manifest make_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir);
Manifest load_manifest(const std::filesystem::path& dir);

/// Images of one view, loaded from disk.
struct ViewImages {
  DepthMap depth;
  std::vector<ColorImage> colors;
  std::vector<ShadowImage> shadows;
};
ViewImages load_view(const Manifest& m, const ViewEntry& v);

}  // namespace relight::scene
