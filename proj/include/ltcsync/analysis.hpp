#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcsync/error.hpp"
#include "ltcsync/events.hpp"
#include "ltcsync/ltc_stream.hpp"
#include "ltcsync/timebase.hpp"

namespace ltcsync::analysis {

// Tolerance thresholds, seconds: the lower bound of the application window,
// the audiovisual skew perception limit, and the upper bound of the window.
inline constexpr double kToleranceTight = 0.040;
inline constexpr double kTolerancePerception = 0.080;
inline constexpr double kToleranceLoose = 1.000;
inline constexpr double kTolerances[] = {kToleranceTight, kTolerancePerception, kToleranceLoose};

// ---------------------------------------------------------------------------
// Small statistics helpers

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population standard deviation.
inline double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

/// Median; the midpoint of the two central values for even counts.
inline double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const std::size_t h = x.size() / 2;
  return x.size() % 2 ? x[h] : 0.5 * (x[h - 1] + x[h]);
}

// ---------------------------------------------------------------------------
// Lag statistics across sessions

struct LagSummary {
  std::size_t count = 0;
  double mean_samples = 0.0;
  double median_samples = 0.0;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
};

inline LagSummary summarize_lags(std::span<const std::int64_t> lags, std::int64_t sample_rate) {
  if (lags.empty()) throw Error(ErrorCode::InvalidArgument, "no lags to summarise");
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  std::vector<double> v(lags.begin(), lags.end());
  LagSummary s;
  s.count = v.size();
  s.mean_samples = mean(v);
  s.median_samples = median(v);
  s.mean_seconds = s.mean_samples / static_cast<double>(sample_rate);
  s.median_seconds = s.median_samples / static_cast<double>(sample_rate);
  return s;
}

// ---------------------------------------------------------------------------
// Frame-level timecode correspondence

struct FramePair {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  std::int64_t anchor_delta = 0;  // anchor_b - anchor_a, samples
  bool equal = false;
};

struct FrameSyncReport {
  std::vector<FramePair> pairs;
  std::size_t compared = 0;
  std::size_t mismatches = 0;
  /// Mismatches where one timecode is exactly one increment ahead of the other.
  std::size_t off_by_one_frame = 0;
  std::optional<std::size_t> first_mismatch;  // index into pairs
  double median_anchor_delta = 0.0;

  bool synchronized() const noexcept { return compared > 0 && mismatches == 0; }
};

namespace detail {

inline double frame_period(std::span<const ltc::TimecodeAnchor> s) {
  std::vector<double> d;
  for (std::size_t i = 1; i < s.size(); ++i) d.push_back(static_cast<double>(s[i].anchor_sample - s[i - 1].anchor_sample));
  return median(d);
}

}  // namespace detail

/// Pairs each frame of `a` with the frame of `b` whose anchor is nearest
/// (within half a frame) and compares timecodes.
inline FrameSyncReport frame_level_sync_check(std::span<const ltc::TimecodeAnchor> a,
                                              std::span<const ltc::TimecodeAnchor> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::NoOverlap, "a stream has no decoded frames");
  double period = detail::frame_period(a);
  if (period <= 0.0) period = detail::frame_period(b);
  if (period <= 0.0) period = HUGE_VAL;

  FrameSyncReport r;
  std::vector<double> deltas;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t t = a[i].anchor_sample;
    while (j + 1 < b.size() && std::llabs(b[j + 1].anchor_sample - t) <= std::llabs(b[j].anchor_sample - t)) ++j;
    const std::int64_t delta = b[j].anchor_sample - t;
    if (static_cast<double>(std::llabs(delta)) * 2.0 >= period) continue;
    FramePair p{i, j, delta, a[i].timecode == b[j].timecode};
    if (!p.equal) {
      ++r.mismatches;
      if (!r.first_mismatch) r.first_mismatch = r.pairs.size();
      if (timecode_increment(a[i].timecode) == b[j].timecode || timecode_increment(b[j].timecode) == a[i].timecode) {
        ++r.off_by_one_frame;
      }
    }
    deltas.push_back(static_cast<double>(delta));
    r.pairs.push_back(p);
  }
  r.compared = r.pairs.size();
  if (r.compared == 0) throw Error(ErrorCode::NoOverlap, "no frames overlap in time");
  r.median_anchor_delta = median(std::move(deltas));
  return r;
}

// ---------------------------------------------------------------------------
// Event-based crossmodal alignment

/// Seconds from each event's offset to the next event's onset.
inline std::vector<double> interevent_durations(const events::EventBoundaries& b) {
  if (b.events.size() < 2) throw Error(ErrorCode::TooFewEvents, "need at least two events");
  if (b.sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  std::vector<double> d;
  d.reserve(b.events.size() - 1);
  for (std::size_t i = 0; i + 1 < b.events.size(); ++i) {
    d.push_back(static_cast<double>(b.events[i + 1].onset_sample - b.events[i].offset_sample) /
                static_cast<double>(b.sample_rate));
  }
  return d;
}

/// Known offset-to-onset durations of a schedule: gap minus beep length.
inline std::vector<double> ground_truth_durations(const events::EventSchedule& s) {
  std::vector<double> d = s.gaps();
  for (double& v : d) v -= s.beep_duration;
  return d;
}

struct StreamStats {
  std::vector<double> abs_errors;  // |empirical - ground truth| per duration
  double mean = 0.0;
  double std = 0.0;
};

struct Verdict {
  double threshold = 0.0;
  bool pass = false;
};

struct AlignmentReport {
  StreamStats a;
  StreamStats b;
  /// Sum of the per-stream mean offsets.
  double conservative_bound = 0.0;
  std::vector<Verdict> verdicts;

  bool all_pass() const noexcept {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
};

inline std::vector<Verdict> tolerance_verdicts(double value) {
  std::vector<Verdict> v;
  for (double t : kTolerances) v.push_back(Verdict{t, value <= t});
  return v;
}

inline AlignmentReport crossmodal_offset_report(std::span<const double> durations_a, std::span<const double> durations_b,
                                                std::span<const double> ground_truth) {
  if (durations_a.size() != ground_truth.size() || durations_b.size() != ground_truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "duration lists differ in length: " + std::to_string(durations_a.size()) +
                                               ", " + std::to_string(durations_b.size()) + ", " +
                                               std::to_string(ground_truth.size()));
  }
  const auto stats = [&](std::span<const double> d) {
    StreamStats s;
    for (std::size_t i = 0; i < d.size(); ++i) s.abs_errors.push_back(std::fabs(d[i] - ground_truth[i]));
    s.mean = mean(s.abs_errors);
    s.std = stddev(s.abs_errors);
    return s;
  };
  AlignmentReport r;
  r.a = stats(durations_a);
  r.b = stats(durations_b);
  r.conservative_bound = r.a.mean + r.b.mean;
  r.verdicts = tolerance_verdicts(r.conservative_bound);
  return r;
}

inline nlohmann::json to_json(const AlignmentReport& r) {
  nlohmann::json j;
  const auto stream = [](const StreamStats& s) {
    return nlohmann::json{{"mean_offset_seconds", s.mean}, {"std_offset_seconds", s.std}, {"count", s.abs_errors.size()}};
  };
  j["stream_a"] = stream(r.a);
  j["stream_b"] = stream(r.b);
  j["conservative_bound_seconds"] = r.conservative_bound;
  for (const auto& v : r.verdicts) {
    j["verdicts"].push_back({{"threshold_seconds", v.threshold}, {"pass", v.pass}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Desynchronization diagnosis

enum class DesyncKind { Synchronized, ConstantOffset, Drifting };

inline std::string to_string(DesyncKind k) {
  switch (k) {
    case DesyncKind::Synchronized: return "synchronized";
    case DesyncKind::ConstantOffset: return "constant-offset";
    case DesyncKind::Drifting: return "drifting";
  }
  return "unknown";
}

struct DesyncThresholds {
  double drift_ppm = 1.0;
  double offset_seconds = 1e-3;
};

struct DesyncDiagnosis {
  double constant_offset = 0.0;  // intercept at t = 0, seconds
  double drift_ppm = 0.0;        // slope * 1e6
  DesyncKind kind = DesyncKind::Synchronized;
};

struct OffsetSample {
  double t = 0.0;
  double offset = 0.0;
};

/// Least-squares line through (t, offset).
inline DesyncDiagnosis classify_desync(std::span<const OffsetSample> series, const DesyncThresholds& th = {}) {
  if (series.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points");
  double mt = 0.0, mo = 0.0;
  for (const auto& s : series) {
    mt += s.t;
    mo += s.offset;
  }
  mt /= static_cast<double>(series.size());
  mo /= static_cast<double>(series.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : series) {
    sxx += (s.t - mt) * (s.t - mt);
    sxy += (s.t - mt) * (s.offset - mo);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  DesyncDiagnosis d;
  d.drift_ppm = slope * 1e6;
  d.constant_offset = mo - slope * mt;
  if (std::fabs(d.drift_ppm) > th.drift_ppm) {
    d.kind = DesyncKind::Drifting;
  } else if (std::fabs(d.constant_offset) > th.offset_seconds) {
    d.kind = DesyncKind::ConstantOffset;
  } else {
    d.kind = DesyncKind::Synchronized;
  }
  return d;
}

inline nlohmann::json to_json(const DesyncDiagnosis& d) {
  return {{"constant_offset_seconds", d.constant_offset}, {"drift_ppm", d.drift_ppm}, {"classification", to_string(d.kind)}};
}

}  // namespace ltcsync::analysis
