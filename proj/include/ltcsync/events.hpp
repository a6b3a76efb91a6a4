#pragma once

// Stimulus schedules, beep-track rendering and amplitude-threshold event
// detection for the crossmodal alignment experiment.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ltcsync/audio.hpp"
#include "ltcsync/error.hpp"

namespace ltcsync::events {

struct EventSchedule {
  /// Seconds from schedule start, strictly increasing.
  std::vector<double> onsets;
  double beep_duration = 0.2;
  std::uint64_t seed = 0;

  std::vector<double> gaps() const {
    std::vector<double> g;
    for (std::size_t i = 1; i < onsets.size(); ++i) g.push_back(onsets[i] - onsets[i - 1]);
    return g;
  }
};

struct ScheduleParams {
  double poisson_mean = 3.0;
  int min_gap = 1;
  int max_gap = 5;
  double lead_in = 1.0;
  double beep_duration = 0.2;
};

/// Draws one gap from Poisson(mean), redrawing until it lands in [lo, hi].
template <class Rng>
int truncated_poisson_gap(Rng& rng, double mean, int lo, int hi) {
  std::poisson_distribution<int> dist(mean);
  while (true) {
    const int g = dist(rng);
    if (g >= lo && g <= hi) return g;
  }
}

/// Truncated Poisson pmf over {lo..hi}, normalised to sum to one.
inline std::vector<double> truncated_poisson_pmf(double mean, int lo, int hi) {
  std::vector<double> p;
  double total = 0.0;
  for (int k = lo; k <= hi; ++k) {
    const double v = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
    p.push_back(v);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

inline EventSchedule generate_schedule(int n_events, std::uint64_t seed, const ScheduleParams& params = {}) {
  if (n_events < 2) throw Error(ErrorCode::InvalidArgument, "need at least two events");
  if (params.min_gap < 1 || params.max_gap < params.min_gap || params.poisson_mean <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "bad gap distribution");
  }
  std::mt19937_64 rng(seed);
  EventSchedule s;
  s.seed = seed;
  s.beep_duration = params.beep_duration;
  double t = params.lead_in;
  s.onsets.push_back(t);
  for (int i = 1; i < n_events; ++i) {
    t += truncated_poisson_gap(rng, params.poisson_mean, params.min_gap, params.max_gap);
    s.onsets.push_back(t);
  }
  return s;
}

struct BeepParams {
  double frequency = 1000.0;
  double amplitude = 0.8;
  /// Linear ramp at each end of the burst, inside beep_duration.
  double fade = 0.0;
  /// Silence after the last burst.
  double tail = 1.0;
};

inline std::int64_t to_sample(double seconds, std::int64_t rate) {
  return static_cast<std::int64_t>(std::llround(seconds * static_cast<double>(rate)));
}

/// Cosine bursts at each onset, silence elsewhere.
inline AudioSignal render_beep_track(const EventSchedule& s, std::int64_t sample_rate, const BeepParams& p = {}) {
  if (sample_rate <= 0 || static_cast<double>(sample_rate) <= 2.0 * p.frequency) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must exceed twice the beep frequency");
  }
  const std::int64_t burst = to_sample(s.beep_duration, sample_rate);
  const std::int64_t fade = std::min(to_sample(p.fade, sample_rate), burst / 2);
  const std::int64_t end =
      s.onsets.empty() ? to_sample(p.tail, sample_rate) : to_sample(s.onsets.back() + s.beep_duration + p.tail, sample_rate);
  std::vector<float> x(static_cast<std::size_t>(std::max<std::int64_t>(end, 0)), 0.0f);
  const double w = 2.0 * std::numbers::pi * p.frequency / static_cast<double>(sample_rate);
  for (double onset : s.onsets) {
    const std::int64_t start = to_sample(onset, sample_rate);
    for (std::int64_t k = 0; k < burst; ++k) {
      const std::int64_t i = start + k;
      if (i < 0 || i >= end) continue;
      double env = 1.0;
      if (fade > 0) {
        if (k < fade) env = static_cast<double>(k) / static_cast<double>(fade);
        else if (k >= burst - fade) env = static_cast<double>(burst - 1 - k) / static_cast<double>(fade);
      }
      x[static_cast<std::size_t>(i)] = static_cast<float>(p.amplitude * env * std::cos(w * static_cast<double>(k)));
    }
  }
  return AudioSignal(sample_rate, std::move(x));
}

struct EventSpan {
  std::int64_t onset_sample = 0;
  /// Last sample at or above threshold (inclusive).
  std::int64_t offset_sample = 0;

  friend bool operator==(const EventSpan&, const EventSpan&) = default;
};

struct EventBoundaries {
  std::vector<EventSpan> events;
  std::int64_t sample_rate = 0;
};

struct DetectParams {
  double threshold = 0.1;
  double min_gap = 0.5;
  /// Dips shorter than this never split an event.
  double hold = 0.005;
};

/// Onset: first sample with |x| >= threshold after a quiet run of at least
/// min_gap (the start of the signal counts as quiet). Offset: the last such
/// sample before the next quiet run.
inline EventBoundaries detect_event_boundaries(const AudioSignal& sig, const DetectParams& p = {}) {
  if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be in (0, 1)");
  if (!(p.min_gap > 0.0)) throw Error(ErrorCode::InvalidArgument, "min_gap must be positive");
  const std::int64_t quiet = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(std::max(p.min_gap, p.hold) * static_cast<double>(sig.sample_rate))));
  EventBoundaries out;
  out.sample_rate = sig.sample_rate;
  std::int64_t last_hot = -1;
  for (std::size_t i = 0; i < sig.samples.size(); ++i) {
    if (std::fabs(sig.samples[i]) < p.threshold) continue;
    const auto n = static_cast<std::int64_t>(i);
    // Quiet run length is the count of samples strictly between hot samples.
    if (out.events.empty() || n - last_hot - 1 >= quiet) {
      out.events.push_back(EventSpan{n, n});
    } else {
      out.events.back().offset_sample = n;
    }
    last_hot = n;
  }
  if (out.events.empty()) throw Error(ErrorCode::NoEventsFound, "no sample reaches the threshold");
  return out;
}

}  // namespace ltcsync::events
