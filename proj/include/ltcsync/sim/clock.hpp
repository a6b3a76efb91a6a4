#pragma once

// Device clock model. Between sync events a clock is affine in true time:
//
//   local(t) = t + offset + drift_ppm * 1e-6 * (t - last_sync)

#include <algorithm>
#include <cstdint>
#include <random>

namespace ltcsync::sim {

struct ClockState {
  double offset = 0.0;     // seconds, device clock minus true time at last_sync
  double drift_ppm = 0.0;  // rate error, parts per million
  double last_sync = 0.0;  // true time, seconds

  friend bool operator==(const ClockState&, const ClockState&) = default;
};

/// Device clock minus true time at t_true.
inline double offset_at(const ClockState& c, double t_true) noexcept {
  return c.offset + c.drift_ppm * 1e-6 * (t_true - c.last_sync);
}

inline double local_time(const ClockState& c, double t_true) noexcept { return t_true + offset_at(c, t_true); }

/// Zero-mean-by-default Gaussian, clamped to [mean - clamp, mean + clamp].
struct ClampedNormal {
  double mean = 0.0;
  double std = 0.5e-3;
  double clamp = 1e-3;

  template <class Rng>
  double operator()(Rng& rng) const {
    if (std <= 0.0) return mean;
    std::normal_distribution<double> d(mean, std);
    return std::clamp(d(rng), mean - clamp, mean + clamp);
  }
};

struct Uniform {
  double min = 0.0;
  double max = 0.0;

  template <class Rng>
  double operator()(Rng& rng) const {
    if (max <= min) return min;
    std::uniform_real_distribution<double> d(min, max);
    return d(rng);
  }
};

/// NTP poll: the offset is replaced by a residual-error draw; drift is kept.
inline ClockState ntp_sync(const ClockState& c, double t_true, double residual) noexcept {
  return ClockState{residual, c.drift_ppm, t_true};
}

template <class Rng>
ClockState ntp_sync(const ClockState& c, double t_true, const ClampedNormal& residual, Rng& rng) {
  return ntp_sync(c, t_true, residual(rng));
}

/// Hub-to-sensor handshake: the sensor adopts the hub's local time, late by
/// the handshake jitter.
inline ClockState handshake_sync(const ClockState& sensor, const ClockState& hub, double t_true, double jitter) noexcept {
  return ClockState{offset_at(hub, t_true) + jitter, sensor.drift_ppm, t_true};
}

template <class Rng>
ClockState handshake_sync(const ClockState& sensor, const ClockState& hub, double t_true, const Uniform& jitter, Rng& rng) {
  return handshake_sync(sensor, hub, t_true, jitter(rng));
}

}  // namespace ltcsync::sim
