#include "relight/service/server.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "httplib.h"
#include "relight/raster/image_io.hpp"

namespace relight::service {

namespace {

using Bytes = std::vector<std::uint8_t>;

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

void send_png(httplib::Response& res, const Bytes& png) {
  res.status = 200;
  res.set_content(std::string(png.begin(), png.end()), "image/png");
}

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

double query_double(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) throw ValidationError(std::string("missing query parameter '") + key + "'");
  const std::string v = req.get_param_value(key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw ValidationError(std::string("bad number for '") + key + "': " + v);
  return d;
}

std::string tau_key(double tau) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", tau);
  return buf;
}

}  // namespace

ShadowMode shadow_mode_from_name(const std::string& s) {
  if (s == "direct") return ShadowMode::direct;
  if (s == "learned") return ShadowMode::learned;
  throw ValidationError("mode must be 'direct' or 'learned', got '" + s + "'");
}

LightKey light_key(double azimuth_deg, double elevation_deg) {
  if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg)) {
    throw ValidationError("light angles must be finite");
  }
  if (!(elevation_deg > 0.0 && elevation_deg < 90.0)) {
    throw ValidationError("elevation must lie in (0, 90) degrees, got " + std::to_string(elevation_deg));
  }
  LightKey k;
  k.elevation_deg = static_cast<int>(std::lround(elevation_deg));
  k.elevation_deg = std::clamp(k.elevation_deg, 1, 89);
  long az = std::lround(azimuth_deg) % 360;
  if (az < 0) az += 360;
  k.azimuth_deg = static_cast<int>(az);
  return k;
}

LightDirection light_from_key(const LightKey& k, double camera_pitch_deg) {
  return LightDirection::from_angles(k.azimuth_deg, k.elevation_deg, camera_pitch_deg);
}

Bytes shadow_png(const models::PreparedView& v, const models::Generator* g, const LightDirection& l,
                 ShadowMode mode, double tau, int direct_steps) {
  if (mode == ShadowMode::direct) {
    return encode_png(models::direct_shadow_image(v, l, direct_steps, tau).raster());
  }
  if (!g) throw ContractError("learned mode needs a checkpoint");
  return encode_png(models::learned_shadow(*g, v, l).raster());
}

Bytes relight_png(const models::PreparedView& v, const models::Generator& g, const LightDirection& l_old,
                  const LightDirection& l_new) {
  return encode_png(models::relight_image(g, v, l_old, l_new).relit.raster());
}

Raster<float> decode_any(const Bytes& bytes) {
  static const std::uint8_t png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_magic, 8) == 0) return decode_png(bytes);
  return decode_pfm(bytes);
}

Session::Session(std::string id_, models::PreparedView v, double pitch)
    : id(std::move(id_)), view(std::move(v)), pitch_deg(pitch) {}

RelightService::RelightService(std::shared_ptr<const models::Generator> gen, ServiceConfig cfg)
    : gen_(std::move(gen)), cfg_(cfg), salt_(std::random_device{}()) {}

std::size_t RelightService::session_count() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

std::shared_ptr<Session> RelightService::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string RelightService::new_id() {
  // Caller holds the unique lock.
  std::mt19937_64 r(salt_ ^ (0x9e3779b97f4a7c15ULL * ++counter_));
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(r()),
                static_cast<unsigned long long>(r()));
  return buf;
}

void RelightService::install(httplib::Server& srv) {
  srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"learned", static_cast<bool>(gen_)}, {"sessions", session_count()}});
  });

  srv.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) {
      return send_error(res, 400, "expected multipart/form-data with 'color', 'depth' and 'camera'");
    }
    if (!req.has_file("depth")) {
      return send_error(res, 422,
                        "a depth map is required: this service does not estimate depth, upload an "
                        "externally estimated depth map as the 'depth' field (PFM)");
    }
    if (!req.has_file("color") || !req.has_file("camera")) {
      return send_error(res, 400, "missing 'color' or 'camera' field");
    }
    try {
      Raster<float> color = decode_any(to_bytes(req.get_file_value("color").content));
      Raster<float> depth = decode_pfm(to_bytes(req.get_file_value("depth").content));
      for (const Raster<float>* r : {&color, &depth}) {
        if (r->width() > cfg_.max_dim || r->height() > cfg_.max_dim) {
          return send_error(res, 413, "image " + shape_string(r->width(), r->height(), r->channels()) +
                                          " exceeds the size cap of " + std::to_string(cfg_.max_dim));
        }
      }
      if (!color.same_size(depth)) {
        return send_error(res, 400, "color " + shape_string(color.width(), color.height(), color.channels()) +
                                        " and depth " +
                                        shape_string(depth.width(), depth.height(), depth.channels()) +
                                        " differ in size");
      }
      const auto cj = nlohmann::json::parse(req.get_file_value("camera").content);
      const auto cam = cj.get<CameraModel>();
      const double pitch = cj.value("pitch_deg", 0.0);
      if (!std::isfinite(pitch)) throw ValidationError("pitch_deg must be finite");
      models::PreparedView view(color_from_raster(color), depth_from_raster(depth), cam);
      std::unique_lock lock(mu_);
      const std::string id = new_id();
      sessions_.emplace(id, std::make_shared<Session>(id, std::move(view), pitch));
      lock.unlock();
      send_json(res, 201, {{"id", id}, {"width", color.width()}, {"height", color.height()}});
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, std::string("invalid camera JSON: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 400, e.what());
    }
  });

  srv.Get(R"(/session/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    nlohmann::json j = {{"id", s->id},
                        {"width", s->view.color.width()},
                        {"height", s->view.color.height()},
                        {"camera", s->view.camera},
                        {"pitch_deg", s->pitch_deg}};
    std::lock_guard lock(s->mu);
    j["aligned"] = s->aligned ? nlohmann::json{{"azimuth", s->aligned->azimuth_deg},
                                               {"elevation", s->aligned->elevation_deg}}
                              : nlohmann::json(nullptr);
    send_json(res, 200, j);
  });

  srv.Get(R"(/session/([0-9a-f]+)/shadow)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    LightKey key;
    ShadowMode mode = ShadowMode::direct;
    double tau = cfg_.default_tau;
    try {
      key = light_key(query_double(req, "azimuth"), query_double(req, "elevation"));
      if (req.has_param("mode")) mode = shadow_mode_from_name(req.get_param_value("mode"));
      if (req.has_param("tau")) {
        tau = query_double(req, "tau");
        if (!(tau > 0.0)) throw ValidationError("tau must be positive");
      }
    } catch (const std::exception& e) {
      return send_error(res, 422, e.what());
    }
    if (mode == ShadowMode::learned && !gen_) return send_error(res, 503, "no checkpoint loaded");
    const std::string ck = std::string(mode == ShadowMode::direct ? "direct/" + tau_key(tau) : "learned") +
                           "/" + std::to_string(key.azimuth_deg) + "/" + std::to_string(key.elevation_deg);
    {
      std::lock_guard lock(s->mu);
      const auto it = s->cache.find(ck);
      if (it != s->cache.end()) return send_png(res, *it->second);
    }
    try {
      auto png = std::make_shared<const Bytes>(shadow_png(s->view, gen_.get(), light_from_key(key, s->pitch_deg),
                                                          mode, tau, cfg_.direct_steps));
      {
        std::lock_guard lock(s->mu);
        s->cache.emplace(ck, png);
      }
      send_png(res, *png);
    } catch (const std::exception& e) {
      send_error(res, 400, e.what());
    }
  });

  srv.Post(R"(/session/([0-9a-f]+)/align)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    LightKey key;
    try {
      const auto j = nlohmann::json::parse(req.body);
      key = light_key(j.at("azimuth").get<double>(), j.at("elevation").get<double>());
    } catch (const nlohmann::json::exception& e) {
      return send_error(res, 400, std::string("expected JSON {azimuth, elevation}: ") + e.what());
    } catch (const std::exception& e) {
      return send_error(res, 422, e.what());
    }
    std::lock_guard lock(s->mu);
    s->aligned = key;
    send_json(res, 200, {{"id", s->id}, {"aligned", {{"azimuth", key.azimuth_deg}, {"elevation", key.elevation_deg}}}});
  });

  srv.Get(R"(/session/([0-9a-f]+)/relight)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    LightKey key;
    try {
      key = light_key(query_double(req, "azimuth"), query_double(req, "elevation"));
    } catch (const std::exception& e) {
      return send_error(res, 422, e.what());
    }
    std::optional<LightKey> aligned;
    {
      std::lock_guard lock(s->mu);
      aligned = s->aligned;
    }
    if (!aligned) return send_error(res, 409, "align the source light first (POST /session/{id}/align)");
    if (!gen_) return send_error(res, 503, "no checkpoint loaded");
    const std::string ck = "relight/" + std::to_string(aligned->azimuth_deg) + "/" +
                           std::to_string(aligned->elevation_deg) + "/" + std::to_string(key.azimuth_deg) +
                           "/" + std::to_string(key.elevation_deg);
    {
      std::lock_guard lock(s->mu);
      const auto it = s->cache.find(ck);
      if (it != s->cache.end()) return send_png(res, *it->second);
    }
    try {
      auto png = std::make_shared<const Bytes>(relight_png(s->view, *gen_, light_from_key(*aligned, s->pitch_deg),
                                                           light_from_key(key, s->pitch_deg)));
      {
        std::lock_guard lock(s->mu);
        s->cache.emplace(ck, png);
      }
      send_png(res, *png);
    } catch (const std::exception& e) {
      send_error(res, 400, e.what());
    }
  });
}

}  // namespace relight::service
