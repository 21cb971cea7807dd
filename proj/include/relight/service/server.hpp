#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "relight/models/pipeline.hpp"

namespace httplib {
class Server;
}

namespace relight::service {

struct ServiceConfig {
  int max_dim = 512;          // larger uploads get 413
  double default_tau = 0.05;  // direct mode when no tau is given
  int direct_steps = 256;
};

enum class ShadowMode { direct, learned };
ShadowMode shadow_mode_from_name(const std::string& s);

/// Sun angles in the camera-level frame, rounded to whole degrees. Every
/// response is computed from the rounded angles, which makes the cache key
/// a complete description of the request.
struct LightKey {
  int azimuth_deg = 0;    // wrapped to [0, 360)
  int elevation_deg = 0;  // (0, 90)
  auto operator<=>(const LightKey&) const = default;
};

/// Validates and quantizes; throws ValidationError unless elevation lies in
/// (0, 90) and both angles are finite.
LightKey light_key(double azimuth_deg, double elevation_deg);
LightDirection light_from_key(const LightKey& k, double camera_pitch_deg);

/// Shared by the HTTP handlers and the offline CLI.
std::vector<std::uint8_t> shadow_png(const models::PreparedView& v, const models::Generator* g,
                                     const LightDirection& l, ShadowMode mode, double tau,
                                     int direct_steps);
std::vector<std::uint8_t> relight_png(const models::PreparedView& v, const models::Generator& g,
                                      const LightDirection& l_old, const LightDirection& l_new);

/// Decodes PNG or PFM by magic bytes.
Raster<float> decode_any(const std::vector<std::uint8_t>& bytes);

struct Session {
  std::string id;
  models::PreparedView view;
  double pitch_deg = 0.0;

  mutable std::mutex mu;  // guards the fields below
  std::optional<LightKey> aligned;
  std::map<std::string, std::shared_ptr<const std::vector<std::uint8_t>>> cache;

  Session(std::string id, models::PreparedView v, double pitch);
};

class RelightService {
 public:
  /// `gen` may be null; learned endpoints then answer 503.
  RelightService(std::shared_ptr<const models::Generator> gen, ServiceConfig cfg = {});

  void install(httplib::Server& srv);
  std::size_t session_count() const;

 private:
  std::shared_ptr<Session> find(const std::string& id) const;
  std::string new_id();

  std::shared_ptr<const models::Generator> gen_;
  ServiceConfig cfg_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_ = 0;
};

}  // namespace relight::service
