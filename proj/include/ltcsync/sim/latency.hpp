#pragma once

// Timestamp error statistics for a simulated run.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcsync/analysis.hpp"
#include "ltcsync/error.hpp"
#include "ltcsync/sim/simulation.hpp"

namespace ltcsync::sim {

struct OffsetSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double mean_abs = 0.0;
  double std = 0.0;
  double median = 0.0;
  double max_abs = 0.0;
};

inline OffsetSummary summarize_offsets(const std::vector<double>& x) {
  OffsetSummary s;
  s.count = x.size();
  if (x.empty()) return s;
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::fabs(v); });
  s.mean = analysis::mean(x);
  s.mean_abs = analysis::mean(a);
  s.std = analysis::stddev(x);
  s.median = analysis::median(x);
  s.max_abs = *std::max_element(a.begin(), a.end());
  return s;
}

struct DeviceLatency {
  int device = 0;
  std::string name;
  Role role = Role::Wearable;
  OffsetSummary offsets;  // device_timestamp - true_time
};

struct LatencyReport {
  std::vector<DeviceLatency> devices;
  OffsetSummary wearables;
  OffsetSummary cameras;
  /// Wearable offset minus camera offset at the camera packet nearest in time.
  OffsetSummary crossmodal;
  std::vector<analysis::Verdict> verdicts;  // on crossmodal.max_abs
};

inline LatencyReport measure_sim_latency(const SimTrace& trace) {
  if (trace.packets.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no packets");
  const std::size_t n = trace.devices.size();
  std::vector<std::vector<PacketRecord>> per(n);
  for (const auto& p : trace.packets) per[static_cast<std::size_t>(p.device)].push_back(p);

  LatencyReport r;
  std::vector<double> wear, cam, cross;
  for (std::size_t d = 0; d < n; ++d) {
    const Role role = trace.devices[d].role;
    if (role != Role::Wearable && role != Role::Camera) continue;
    std::vector<double> off;
    off.reserve(per[d].size());
    for (const auto& p : per[d]) off.push_back(p.device_timestamp - p.true_time);
    (role == Role::Wearable ? wear : cam).insert((role == Role::Wearable ? wear : cam).end(), off.begin(), off.end());
    r.devices.push_back(DeviceLatency{static_cast<int>(d), trace.devices[d].name, role, summarize_offsets(off)});
  }

  for (int c : trace.devices_with_role(Role::Camera)) {
    const auto& cp = per[static_cast<std::size_t>(c)];
    if (cp.empty()) continue;
    for (int w : trace.devices_with_role(Role::Wearable)) {
      std::size_t j = 0;
      for (const auto& p : per[static_cast<std::size_t>(w)]) {
        while (j + 1 < cp.size() && std::fabs(cp[j + 1].true_time - p.true_time) <= std::fabs(cp[j].true_time - p.true_time)) ++j;
        cross.push_back((p.device_timestamp - p.true_time) - (cp[j].device_timestamp - cp[j].true_time));
      }
    }
  }
  r.wearables = summarize_offsets(wear);
  r.cameras = summarize_offsets(cam);
  r.crossmodal = summarize_offsets(cross);
  r.verdicts = analysis::tolerance_verdicts(r.crossmodal.max_abs);
  return r;
}

inline nlohmann::json to_json(const OffsetSummary& s) {
  return {{"count", s.count},       {"mean_seconds", s.mean},     {"mean_abs_seconds", s.mean_abs},
          {"std_seconds", s.std},   {"median_seconds", s.median}, {"max_abs_seconds", s.max_abs}};
}

inline nlohmann::json to_json(const LatencyReport& r) {
  nlohmann::json j;
  for (const auto& d : r.devices) {
    j["devices"].push_back({{"device_id", d.name}, {"role", to_string(d.role)}, {"offsets", to_json(d.offsets)}});
  }
  j["wearables"] = to_json(r.wearables);
  j["cameras"] = to_json(r.cameras);
  j["crossmodal"] = to_json(r.crossmodal);
  for (const auto& v : r.verdicts) j["verdicts"].push_back({{"threshold_seconds", v.threshold}, {"pass", v.pass}});
  return j;
}

}  // namespace ltcsync::sim
