#pragma once

// Simulation configuration and its JSON file form. Every key is optional;
// missing keys keep the defaults below. Unknown keys are rejected.
//
// {
//   "seed": 1,
//   "duration_seconds": 34200,
//   "packet_interval_seconds": 1.0,
//   "topology": {"wearables": 4, "cameras": 4, "hubs": 1, "base_stations": 1},
//   "ntp": {"poll_interval_seconds": 16,
//           "residual": {"mean_seconds": 0, "std_seconds": 0.0005, "clamp_seconds": 0.001}},
//   "wearable_sync": {"interval_seconds": 60, "handshake_duration_seconds": 1.0,
//                     "jitter_seconds": {"min": 0, "max": 0.010}},
//   "drift_ppm": {"min": -20, "max": 20},
//   "camera_lock": {"loss_enabled": false, "loss_start_seconds": 0, "loss_duration_seconds": 0}
// }

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ltcsync/error.hpp"
#include "ltcsync/sim/clock.hpp"

namespace ltcsync::sim {

struct TopologyConfig {
  int wearables = 4;
  int cameras = 4;
  int hubs = 1;
  int base_stations = 1;

  ClampedNormal ntp_residual{0.0, 0.5e-3, 1e-3};
  double ntp_poll_interval = 16.0;

  double wearable_sync_interval = 60.0;
  double handshake_duration = 1.0;
  Uniform handshake_jitter{0.0, 0.010};

  Uniform drift_ppm{-20.0, 20.0};

  bool camera_lock_loss = false;
  double lock_loss_start = 0.0;
  double lock_loss_duration = 0.0;

  double packet_interval = 1.0;
  double duration = 9.5 * 3600.0;
  std::uint64_t seed = 1;
};

/// Throws InvalidConfig describing the first violated constraint.
inline void validate(const TopologyConfig& c) {
  const auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (c.wearables < 0 || c.cameras < 0) fail("device counts must be non-negative");
  if (c.wearables > 0 && c.hubs < 1) fail("wearables need at least one hub");
  if (c.cameras > 0 && c.base_stations < 1) fail("cameras need at least one base station");
  if (c.hubs < 0 || c.base_stations < 0) fail("hub and base station counts must be non-negative");
  if (!(c.wearable_sync_interval > 0.0 && c.wearable_sync_interval <= 600.0)) {
    fail("wearable sync interval must be in (0, 600] seconds");
  }
  if (!(c.handshake_duration >= 0.0)) fail("handshake duration must be non-negative");
  if (c.hubs > 0) {
    const int per_hub = (c.wearables + c.hubs - 1) / c.hubs;
    if (per_hub * c.handshake_duration > c.wearable_sync_interval) {
      fail("sequential handshakes do not fit in one sync interval");
    }
  }
  if (!(c.ntp_poll_interval > 0.0)) fail("NTP poll interval must be positive");
  if (!(c.ntp_residual.std >= 0.0 && c.ntp_residual.clamp >= 0.0)) fail("NTP residual std and clamp must be non-negative");
  if (c.handshake_jitter.max < c.handshake_jitter.min) fail("handshake jitter max < min");
  if (c.drift_ppm.max < c.drift_ppm.min) fail("drift max < min");
  if (!(c.packet_interval > 0.0)) fail("packet interval must be positive");
  if (!(c.duration > 0.0) || !std::isfinite(c.duration)) fail("duration must be positive");
  if (c.camera_lock_loss && !(c.lock_loss_duration >= 0.0 && c.lock_loss_start >= 0.0)) fail("bad lock-loss window");
}

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline TopologyConfig config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::read;
  TopologyConfig c;
  check_keys(j, {"seed", "duration_seconds", "packet_interval_seconds", "topology", "ntp", "wearable_sync", "drift_ppm",
                 "camera_lock"},
             "config");
  read(j, "seed", c.seed);
  read(j, "duration_seconds", c.duration);
  read(j, "packet_interval_seconds", c.packet_interval);
  if (j.contains("topology")) {
    const auto& t = j["topology"];
    check_keys(t, {"wearables", "cameras", "hubs", "base_stations"}, "topology");
    read(t, "wearables", c.wearables);
    read(t, "cameras", c.cameras);
    read(t, "hubs", c.hubs);
    read(t, "base_stations", c.base_stations);
  }
  if (j.contains("ntp")) {
    const auto& n = j["ntp"];
    check_keys(n, {"poll_interval_seconds", "residual"}, "ntp");
    read(n, "poll_interval_seconds", c.ntp_poll_interval);
    if (n.contains("residual")) {
      const auto& r = n["residual"];
      check_keys(r, {"mean_seconds", "std_seconds", "clamp_seconds"}, "ntp.residual");
      read(r, "mean_seconds", c.ntp_residual.mean);
      read(r, "std_seconds", c.ntp_residual.std);
      read(r, "clamp_seconds", c.ntp_residual.clamp);
    }
  }
  if (j.contains("wearable_sync")) {
    const auto& w = j["wearable_sync"];
    check_keys(w, {"interval_seconds", "handshake_duration_seconds", "jitter_seconds"}, "wearable_sync");
    read(w, "interval_seconds", c.wearable_sync_interval);
    read(w, "handshake_duration_seconds", c.handshake_duration);
    if (w.contains("jitter_seconds")) {
      const auto& r = w["jitter_seconds"];
      check_keys(r, {"min", "max"}, "wearable_sync.jitter_seconds");
      read(r, "min", c.handshake_jitter.min);
      read(r, "max", c.handshake_jitter.max);
    }
  }
  if (j.contains("drift_ppm")) {
    const auto& d = j["drift_ppm"];
    check_keys(d, {"min", "max"}, "drift_ppm");
    read(d, "min", c.drift_ppm.min);
    read(d, "max", c.drift_ppm.max);
  }
  if (j.contains("camera_lock")) {
    const auto& l = j["camera_lock"];
    check_keys(l, {"loss_enabled", "loss_start_seconds", "loss_duration_seconds"}, "camera_lock");
    read(l, "loss_enabled", c.camera_lock_loss);
    read(l, "loss_start_seconds", c.lock_loss_start);
    read(l, "loss_duration_seconds", c.lock_loss_duration);
  }
  validate(c);
  return c;
}

inline nlohmann::json to_json(const TopologyConfig& c) {
  return {
      {"seed", c.seed},
      {"duration_seconds", c.duration},
      {"packet_interval_seconds", c.packet_interval},
      {"topology", {{"wearables", c.wearables}, {"cameras", c.cameras}, {"hubs", c.hubs}, {"base_stations", c.base_stations}}},
      {"ntp",
       {{"poll_interval_seconds", c.ntp_poll_interval},
        {"residual",
         {{"mean_seconds", c.ntp_residual.mean}, {"std_seconds", c.ntp_residual.std}, {"clamp_seconds", c.ntp_residual.clamp}}}}},
      {"wearable_sync",
       {{"interval_seconds", c.wearable_sync_interval},
        {"handshake_duration_seconds", c.handshake_duration},
        {"jitter_seconds", {{"min", c.handshake_jitter.min}, {"max", c.handshake_jitter.max}}}}},
      {"drift_ppm", {{"min", c.drift_ppm.min}, {"max", c.drift_ppm.max}}},
      {"camera_lock",
       {{"loss_enabled", c.camera_lock_loss},
        {"loss_start_seconds", c.lock_loss_start},
        {"loss_duration_seconds", c.lock_loss_duration}}},
  };
}

inline TopologyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace ltcsync::sim
