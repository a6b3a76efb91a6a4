// Two LTC recorders started 79 samples apart: encode, decode, estimate the lag.
#include <cstdio>

#include "ltcsync/ltcsync.hpp"

using namespace ltcsync;

int main() {
  const std::int64_t sr = 192000;
  const Timecode start = parse_timecode("12:00:00:00", FrameRate::Fps30);
  const auto a = ltc::generate_ltc(start, 60, sr);

  std::vector<float> delayed(79, 0.0f);
  delayed.insert(delayed.end(), a.samples.begin(), a.samples.end() - 79);
  const AudioSignal b(sr, std::move(delayed));

  const auto fa = ltc::extract_timecodes(a, 80, FrameRate::Fps30);
  const auto fb = ltc::extract_timecodes(b, 80, FrameRate::Fps30);
  std::printf("decoded %zu / %zu frames, first %s\n", fa.frames.size(), fb.frames.size(),
              to_string(fa.frames.front().timecode).c_str());

  const auto lag = xcorr::crosscorr_lag(a.samples, b.samples, sr, 6400);
  std::printf("lag %lld samples (%.2f us)\n", static_cast<long long>(lag.lag_samples), lag.lag_seconds * 1e6);

  const auto sync = analysis::frame_level_sync_check(fa.frames, fb.frames);
  std::printf("frame-level: %s\n", sync.synchronized() ? "synchronized" : "not synchronized");
  return 0;
}
