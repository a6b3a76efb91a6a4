#pragma once

// Time representations used across the toolkit: UNIX instants, UTC
// time-of-day with milliseconds, and non-drop-frame SMPTE timecode.

#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <tuple>

#include "ltcsync/error.hpp"

namespace ltcsync {

inline constexpr std::int64_t kNanosPerMilli = 1'000'000;
inline constexpr std::int64_t kMillisPerDay = 86'400'000;

/// Supported non-drop frame rates.
enum class FrameRate : int { Fps24 = 24, Fps25 = 25, Fps30 = 30 };

constexpr int fps(FrameRate r) noexcept { return static_cast<int>(r); }

constexpr bool is_supported_rate(int value) noexcept {
  return value == 24 || value == 25 || value == 30;
}

inline FrameRate frame_rate_from_int(int value) {
  if (!is_supported_rate(value)) {
    throw Error(ErrorCode::UnsupportedRate,
                "frame rate " + std::to_string(value) + " (supported: 24, 25, 30)");
  }
  return static_cast<FrameRate>(value);
}

struct UnixInstant {
  std::int64_t nanoseconds = 0;

  friend constexpr auto operator<=>(const UnixInstant&, const UnixInstant&) = default;
};

/// UTC time of day, HH:MM:SS.mmm.
struct WallClock {
  int hours = 0;
  int minutes = 0;
  int seconds = 0;
  int milliseconds = 0;

  constexpr bool valid() const noexcept {
    return hours >= 0 && hours < 24 && minutes >= 0 && minutes < 60 && seconds >= 0 &&
           seconds < 60 && milliseconds >= 0 && milliseconds < 1000;
  }

  constexpr std::int64_t total_milliseconds() const noexcept {
    return ((static_cast<std::int64_t>(hours) * 60 + minutes) * 60 + seconds) * 1000 +
           milliseconds;
  }

  static WallClock from_total_milliseconds(std::int64_t ms) {
    ms %= kMillisPerDay;
    if (ms < 0) ms += kMillisPerDay;
    WallClock w;
    w.milliseconds = static_cast<int>(ms % 1000);
    ms /= 1000;
    w.seconds = static_cast<int>(ms % 60);
    ms /= 60;
    w.minutes = static_cast<int>(ms % 60);
    w.hours = static_cast<int>(ms / 60);
    return w;
  }

  friend constexpr auto operator<=>(const WallClock&, const WallClock&) = default;
};

/// HH:MM:SS:FF at a declared frame rate. Ordering compares the time fields
/// first, so only compare timecodes at equal rates.
struct Timecode {
  int hours = 0;
  int minutes = 0;
  int seconds = 0;
  int frames = 0;
  FrameRate rate = FrameRate::Fps30;

  constexpr bool valid() const noexcept {
    return is_supported_rate(fps(rate)) && hours >= 0 && hours < 24 && minutes >= 0 &&
           minutes < 60 && seconds >= 0 && seconds < 60 && frames >= 0 && frames < fps(rate);
  }

  /// Frames since 00:00:00:00.
  constexpr std::int64_t frame_number() const noexcept {
    return ((static_cast<std::int64_t>(hours) * 60 + minutes) * 60 + seconds) * fps(rate) +
           frames;
  }

  static Timecode from_frame_number(std::int64_t n, FrameRate rate) {
    const std::int64_t per_day = std::int64_t{86'400} * fps(rate);
    n %= per_day;
    if (n < 0) n += per_day;
    Timecode tc;
    tc.rate = rate;
    tc.frames = static_cast<int>(n % fps(rate));
    n /= fps(rate);
    tc.seconds = static_cast<int>(n % 60);
    n /= 60;
    tc.minutes = static_cast<int>(n % 60);
    tc.hours = static_cast<int>(n / 60);
    return tc;
  }

  friend constexpr auto operator<=>(const Timecode&, const Timecode&) = default;
};

inline void require_valid(const Timecode& tc) {
  if (!tc.valid()) {
    throw Error(ErrorCode::InvalidTimecode, "timecode fields out of range");
  }
}

/// UTC time of day of `t`, milliseconds truncated. Leap seconds are ignored.
inline WallClock unix_to_wallclock(UnixInstant t) {
  std::int64_t ms = t.nanoseconds / kNanosPerMilli;
  if (t.nanoseconds % kNanosPerMilli < 0) --ms;  // floor for pre-epoch instants
  return WallClock::from_total_milliseconds(ms);
}

/// frames = floor(ms * rate / 1000); the frame that contains the instant.
inline Timecode wallclock_to_timecode(const WallClock& w, FrameRate rate) {
  if (!is_supported_rate(fps(rate))) {
    throw Error(ErrorCode::UnsupportedRate, "frame rate " + std::to_string(fps(rate)));
  }
  if (!w.valid()) throw Error(ErrorCode::InvalidArgument, "wall clock fields out of range");
  Timecode tc;
  tc.hours = w.hours;
  tc.minutes = w.minutes;
  tc.seconds = w.seconds;
  tc.frames = w.milliseconds * fps(rate) / 1000;
  tc.rate = rate;
  return tc;
}

/// Next frame, carrying through seconds, minutes and hours; wraps at 24 h.
inline Timecode timecode_increment(const Timecode& tc) {
  return Timecode::from_frame_number(tc.frame_number() + 1, tc.rate);
}

/// Timecode of the video frame containing stream_start + sample_index / sample_rate.
/// Evaluated in exact integer arithmetic, so an instant on a frame boundary
/// belongs to the frame that starts there.
inline Timecode sample_to_timecode(std::int64_t sample_index, std::int64_t sample_rate,
                                   const WallClock& stream_start, FrameRate rate) {
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!stream_start.valid()) throw Error(ErrorCode::InvalidArgument, "wall clock out of range");
  // Instant in units of 1 / (1000 * sample_rate) seconds.
  const __int128 denom = static_cast<__int128>(1000) * sample_rate;
  const __int128 ticks = static_cast<__int128>(stream_start.total_milliseconds()) * sample_rate +
                         static_cast<__int128>(sample_index) * 1000;
  __int128 whole_seconds = ticks / denom;
  __int128 remainder = ticks % denom;
  if (remainder < 0) {
    remainder += denom;
    --whole_seconds;
  }
  const auto frame_in_second = static_cast<std::int64_t>(remainder * fps(rate) / denom);
  return Timecode::from_frame_number(
      static_cast<std::int64_t>(whole_seconds) * fps(rate) + frame_in_second, rate);
}

// Text forms: "HH:MM:SS:FF" and "HH:MM:SS.mmm".

inline std::string to_string(const Timecode& tc) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d:%02d", tc.hours, tc.minutes, tc.seconds,
                tc.frames);
  return buf;
}

inline std::string to_string(const WallClock& w) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d.%03d", w.hours, w.minutes, w.seconds,
                w.milliseconds);
  return buf;
}

namespace detail {

inline bool parse_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

inline Timecode parse_timecode(std::string_view text, FrameRate rate) {
  Timecode tc;
  tc.rate = rate;
  if (text.size() != 11 || text[2] != ':' || text[5] != ':' || (text[8] != ':' && text[8] != ';') ||
      !detail::parse_digits(text.substr(0, 2), tc.hours) ||
      !detail::parse_digits(text.substr(3, 2), tc.minutes) ||
      !detail::parse_digits(text.substr(6, 2), tc.seconds) ||
      !detail::parse_digits(text.substr(9, 2), tc.frames)) {
    throw Error(ErrorCode::Parse, "expected HH:MM:SS:FF, got '" + std::string(text) + "'");
  }
  require_valid(tc);
  return tc;
}

inline WallClock parse_wallclock(std::string_view text) {
  WallClock w;
  if (text.size() != 12 || text[2] != ':' || text[5] != ':' || text[8] != '.' ||
      !detail::parse_digits(text.substr(0, 2), w.hours) ||
      !detail::parse_digits(text.substr(3, 2), w.minutes) ||
      !detail::parse_digits(text.substr(6, 2), w.seconds) ||
      !detail::parse_digits(text.substr(9, 3), w.milliseconds)) {
    throw Error(ErrorCode::Parse, "expected HH:MM:SS.mmm, got '" + std::string(text) + "'");
  }
  if (!w.valid()) throw Error(ErrorCode::Parse, "wall clock out of range: " + std::string(text));
  return w;
}

}  // namespace ltcsync
