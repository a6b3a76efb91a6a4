#pragma once

// Discrete-event simulation of the acquisition network:
//
//   NTP server --> hub(s) --handshake--> wearables
//              \-> LTC converter --> base station (master) --RF lock--> camera slaves
//
// NTP-disciplined devices (hubs, converter) are re-synced every poll
// interval. Each hub visits its wearables one at a time in device order, each
// visit taking handshake_duration. Masters follow the converter's clock and
// locked camera slaves follow their master exactly. Wearables and cameras emit
// a timestamped data packet every packet_interval.
//
// Events at equal true time run in the order: NTP poll, lock change,
// handshake, packet; then by device id. Runs are deterministic per seed.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "ltcsync/error.hpp"
#include "ltcsync/sim/clock.hpp"
#include "ltcsync/sim/config.hpp"

namespace ltcsync::sim {

enum class Role { Hub, Converter, Master, Wearable, Camera };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Hub: return "hub";
    case Role::Converter: return "ltc";
    case Role::Master: return "master";
    case Role::Wearable: return "wearable";
    case Role::Camera: return "camera";
  }
  return "?";
}

struct Device {
  std::string name;
  Role role = Role::Hub;
  int parent = -1;  // hub of a wearable, master of a camera
};

struct PacketRecord {
  int device = 0;
  double true_time = 0.0;
  double device_timestamp = 0.0;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

enum class SyncKind { Init, Ntp, Handshake, LtcLock, LockLost, LockRegained };

inline const char* to_string(SyncKind k) {
  switch (k) {
    case SyncKind::Init: return "init";
    case SyncKind::Ntp: return "ntp";
    case SyncKind::Handshake: return "handshake";
    case SyncKind::LtcLock: return "ltc_lock";
    case SyncKind::LockLost: return "lock_lost";
    case SyncKind::LockRegained: return "lock_regained";
  }
  return "?";
}

struct SyncRecord {
  double true_time = 0.0;
  int device = 0;
  SyncKind kind = SyncKind::Init;
  ClockState state;

  friend bool operator==(const SyncRecord&, const SyncRecord&) = default;
};

struct SimTrace {
  TopologyConfig config;
  std::vector<Device> devices;
  /// All packets in event order; per device, true_time is strictly increasing.
  std::vector<PacketRecord> packets;
  std::vector<SyncRecord> sync_log;

  std::vector<PacketRecord> packets_of(int device) const {
    std::vector<PacketRecord> out;
    for (const auto& p : packets) {
      if (p.device == device) out.push_back(p);
    }
    return out;
  }

  std::vector<int> devices_with_role(Role r) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < devices.size(); ++i) {
      if (devices[i].role == r) out.push_back(static_cast<int>(i));
    }
    return out;
  }
};

namespace detail {

enum class EventKind : int { NtpPoll = 0, LockChange = 1, Handshake = 2, Packet = 3 };

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::Packet;
  int device = 0;
  std::int64_t index = 0;  // occurrence number, used to compute the next time

  bool operator>(const Event& o) const noexcept {
    if (t != o.t) return t > o.t;
    if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
    if (device != o.device) return device > o.device;
    return index > o.index;
  }
};

enum Stream : std::uint64_t { kDriftStream = 1, kNtpStream = 2, kJitterStream = 3 };

/// Independent generator per (seed, device, purpose), so adding devices or
/// changing intervals leaves the other draws untouched.
inline std::mt19937_64 make_rng(std::uint64_t seed, int device, Stream purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(device), static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

}  // namespace detail

inline SimTrace run_simulation(const TopologyConfig& cfg) {
  using detail::Event;
  using detail::EventKind;
  validate(cfg);

  SimTrace trace;
  trace.config = cfg;
  auto& devs = trace.devices;
  const auto add = [&](const std::string& prefix, int i, Role r, int parent) {
    devs.push_back(Device{prefix + std::to_string(i), r, parent});
    return static_cast<int>(devs.size()) - 1;
  };
  std::vector<int> hubs, masters, wearables, cameras;
  int converter = -1;
  for (int i = 0; i < cfg.hubs; ++i) hubs.push_back(add("hub", i, Role::Hub, -1));
  if (cfg.base_stations > 0) converter = add("ltc", 0, Role::Converter, -1);
  for (int i = 0; i < cfg.base_stations; ++i) masters.push_back(add("master", i, Role::Master, converter));
  for (int i = 0; i < cfg.wearables; ++i) {
    wearables.push_back(add("wearable", i, Role::Wearable, hubs[static_cast<std::size_t>(i % cfg.hubs)]));
  }
  for (int i = 0; i < cfg.cameras; ++i) {
    cameras.push_back(add("camera", i, Role::Camera, masters[static_cast<std::size_t>(i % cfg.base_stations)]));
  }

  const std::size_t n = devs.size();
  std::vector<ClockState> clock(n);
  std::vector<double> own_drift(n);
  std::vector<std::mt19937_64> ntp_rng, jitter_rng;
  for (std::size_t d = 0; d < n; ++d) {
    auto rng = detail::make_rng(cfg.seed, static_cast<int>(d), detail::kDriftStream);
    own_drift[d] = cfg.drift_ppm(rng);
    ntp_rng.push_back(detail::make_rng(cfg.seed, static_cast<int>(d), detail::kNtpStream));
    jitter_rng.push_back(detail::make_rng(cfg.seed, static_cast<int>(d), detail::kJitterStream));
  }
  std::vector<bool> locked(n, true);

  const auto log = [&](double t, int d, SyncKind k) { trace.sync_log.push_back(SyncRecord{t, d, k, clock[static_cast<std::size_t>(d)]}); };
  const auto follow_converter = [&](double t, SyncKind k) {
    for (int m : masters) {
      clock[static_cast<std::size_t>(m)] = clock[static_cast<std::size_t>(converter)];
      log(t, m, k);
    }
    for (int c : cameras) {
      if (!locked[static_cast<std::size_t>(c)]) continue;
      clock[static_cast<std::size_t>(c)] = clock[static_cast<std::size_t>(devs[static_cast<std::size_t>(c)].parent)];
      log(t, c, k);
    }
  };

  for (std::size_t d = 0; d < n; ++d) {
    clock[d] = ClockState{0.0, own_drift[d], 0.0};
  }
  if (converter >= 0) {
    for (int m : masters) clock[static_cast<std::size_t>(m)] = clock[static_cast<std::size_t>(converter)];
    for (int c : cameras) clock[static_cast<std::size_t>(c)] = clock[static_cast<std::size_t>(converter)];
  }
  for (std::size_t d = 0; d < n; ++d) log(0.0, static_cast<int>(d), SyncKind::Init);

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  for (int h : hubs) queue.push(Event{0.0, EventKind::NtpPoll, h, 0});
  if (converter >= 0) queue.push(Event{0.0, EventKind::NtpPoll, converter, 0});

  // Position of each wearable in its hub's visiting order.
  std::vector<int> slot(n, 0);
  {
    std::vector<int> next_slot(n, 0);
    for (int w : wearables) slot[static_cast<std::size_t>(w)] = next_slot[static_cast<std::size_t>(devs[static_cast<std::size_t>(w)].parent)]++;
  }
  const auto handshake_time = [&](int w, std::int64_t round) {
    return static_cast<double>(round) * cfg.wearable_sync_interval + slot[static_cast<std::size_t>(w)] * cfg.handshake_duration;
  };
  for (int w : wearables) queue.push(Event{handshake_time(w, 0), EventKind::Handshake, w, 0});

  std::vector<int> producers = wearables;
  producers.insert(producers.end(), cameras.begin(), cameras.end());
  std::vector<double> phase(n, 0.0);
  for (std::size_t q = 0; q < producers.size(); ++q) {
    const int d = producers[q];
    phase[static_cast<std::size_t>(d)] = cfg.packet_interval * static_cast<double>(q) / static_cast<double>(producers.size());
    queue.push(Event{phase[static_cast<std::size_t>(d)], EventKind::Packet, d, 0});
  }
  if (cfg.camera_lock_loss && !cameras.empty()) {
    queue.push(Event{cfg.lock_loss_start, EventKind::LockChange, cameras.front(), 0});
    queue.push(Event{cfg.lock_loss_start + cfg.lock_loss_duration, EventKind::LockChange, cameras.front(), 1});
  }

  trace.packets.reserve(static_cast<std::size_t>(cfg.duration / cfg.packet_interval + 1) * producers.size());
  while (!queue.empty()) {
    const Event e = queue.top();
    queue.pop();
    if (e.t >= cfg.duration) continue;
    const auto d = static_cast<std::size_t>(e.device);
    switch (e.kind) {
      case EventKind::NtpPoll:
        clock[d] = ntp_sync(clock[d], e.t, cfg.ntp_residual, ntp_rng[d]);
        log(e.t, e.device, SyncKind::Ntp);
        if (e.device == converter) follow_converter(e.t, SyncKind::LtcLock);
        queue.push(Event{static_cast<double>(e.index + 1) * cfg.ntp_poll_interval, e.kind, e.device, e.index + 1});
        break;
      case EventKind::Handshake:
        clock[d] = handshake_sync(clock[d], clock[static_cast<std::size_t>(devs[d].parent)], e.t, cfg.handshake_jitter, jitter_rng[d]);
        log(e.t, e.device, SyncKind::Handshake);
        queue.push(Event{handshake_time(e.device, e.index + 1), e.kind, e.device, e.index + 1});
        break;
      case EventKind::LockChange:
        for (int c : cameras) {
          const auto cd = static_cast<std::size_t>(c);
          const auto& master = clock[static_cast<std::size_t>(devs[cd].parent)];
          if (e.index == 0) {
            // Free-run from the master's current reading at the camera's own rate.
            clock[cd] = ClockState{offset_at(master, e.t), own_drift[cd], e.t};
            locked[cd] = false;
            log(e.t, c, SyncKind::LockLost);
          } else {
            clock[cd] = master;
            locked[cd] = true;
            log(e.t, c, SyncKind::LockRegained);
          }
        }
        break;
      case EventKind::Packet:
        trace.packets.push_back(PacketRecord{e.device, e.t, local_time(clock[d], e.t)});
        queue.push(Event{phase[d] + static_cast<double>(e.index + 1) * cfg.packet_interval, e.kind, e.device, e.index + 1});
        break;
    }
  }
  return trace;
}

/// Recomputes every packet timestamp from the sync log alone.
inline std::vector<double> replay_timestamps(const SimTrace& trace) {
  std::vector<ClockState> state(trace.devices.size());
  std::vector<double> out;
  out.reserve(trace.packets.size());
  std::size_t li = 0;
  for (const auto& p : trace.packets) {
    while (li < trace.sync_log.size() && trace.sync_log[li].true_time <= p.true_time) {
      state[static_cast<std::size_t>(trace.sync_log[li].device)] = trace.sync_log[li].state;
      ++li;
    }
    out.push_back(local_time(state[static_cast<std::size_t>(p.device)], p.true_time));
  }
  return out;
}

inline void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << "device_id,true_time,device_timestamp\n";
  char line[128];
  for (const auto& p : trace.packets) {
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g\n", trace.devices[static_cast<std::size_t>(p.device)].name.c_str(),
                  p.true_time, p.device_timestamp);
    out << line;
  }
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace ltcsync::sim
