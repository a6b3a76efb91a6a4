#include "ltcsync/events.hpp"

#include <gtest/gtest.h>

#include <map>

#include "ltcsync/analysis.hpp"

using namespace ltcsync;
using namespace ltcsync::events;

TEST(Schedule, TenEventsWithGapsInRange) {
  const auto s = generate_schedule(10, 42);
  ASSERT_EQ(s.onsets.size(), 10u);
  EXPECT_DOUBLE_EQ(s.onsets.front(), 1.0);
  for (double g : s.gaps()) {
    EXPECT_GE(g, 1.0);
    EXPECT_LE(g, 5.0);
    EXPECT_EQ(g, std::round(g));
  }
}

TEST(Schedule, DeterministicPerSeed) {
  EXPECT_EQ(generate_schedule(50, 7).onsets, generate_schedule(50, 7).onsets);
  EXPECT_NE(generate_schedule(50, 7).onsets, generate_schedule(50, 8).onsets);
}

TEST(Schedule, GapHistogramMatchesTruncatedPoisson) {
  // pmf oracle: e^-3 3^k / k!, renormalised over 1..5.
  const std::vector<double> expected = {0.172414, 0.258621, 0.258621, 0.193966, 0.116379};
  const auto pmf = truncated_poisson_pmf(3.0, 1, 5);
  double total = 0.0;
  for (double p : pmf) total += p;
  ASSERT_NEAR(total, 1.0, 1e-12);
  // Unnormalised terms 3, 4.5, 4.5, 3.375, 2.025 over their sum 17.4 (common e^-3 cancels).
  const double z = 3.0 + 4.5 + 4.5 + 3.375 + 2.025;
  EXPECT_NEAR(pmf[0], 3.0 / z, 1e-12);
  EXPECT_NEAR(pmf[4], 2.025 / z, 1e-12);

  std::mt19937_64 rng(1);
  std::map<int, int> hist;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hist[truncated_poisson_gap(rng, 3.0, 1, 5)];
  for (int k = 1; k <= 5; ++k) {
    EXPECT_NEAR(static_cast<double>(hist[k]) / n, pmf[static_cast<std::size_t>(k - 1)], 0.01) << k;
    EXPECT_NEAR(pmf[static_cast<std::size_t>(k - 1)], expected[static_cast<std::size_t>(k - 1)], 1e-5);
  }
  EXPECT_EQ(hist.size(), 5u);
}

TEST(Schedule, RejectsBadParameters) {
  EXPECT_THROW(generate_schedule(1, 1), Error);
  ScheduleParams p;
  p.max_gap = 0;
  EXPECT_THROW(generate_schedule(5, 1, p), Error);
}

TEST(Render, EmptyScheduleIsSilent) {
  EventSchedule s;
  const auto x = render_beep_track(s, 48000);
  EXPECT_EQ(x.samples.size(), 48000u);
  for (float v : x.samples) EXPECT_EQ(v, 0.0f);
}

TEST(Render, BurstsAreNonzeroAndBounded) {
  const auto s = generate_schedule(5, 3);
  const auto x = render_beep_track(s, 48000);
  float peak = 0.0f;
  for (float v : x.samples) peak = std::max(peak, std::fabs(v));
  EXPECT_FLOAT_EQ(peak, 0.8f);
  EXPECT_EQ(x.samples[static_cast<std::size_t>(to_sample(s.onsets[0], 48000))], 0.8f);
  EXPECT_EQ(x.samples[static_cast<std::size_t>(to_sample(s.onsets[0], 48000)) - 1], 0.0f);
}

TEST(Render, RejectsRateBelowNyquist) { EXPECT_THROW(render_beep_track(generate_schedule(3, 1), 2000), Error); }

class DetectAtRate : public ::testing::TestWithParam<std::int64_t> {};

TEST_P(DetectAtRate, OnsetsWithinOneMillisecond) {
  const std::int64_t sr = GetParam();
  const auto s = generate_schedule(10, 42);
  const auto b = detect_event_boundaries(render_beep_track(s, sr));
  ASSERT_EQ(b.events.size(), s.onsets.size());
  for (std::size_t i = 0; i < s.onsets.size(); ++i) {
    EXPECT_NEAR(static_cast<double>(b.events[i].onset_sample) / static_cast<double>(sr), s.onsets[i], 1e-3);
    EXPECT_NEAR(static_cast<double>(b.events[i].offset_sample + 1 - b.events[i].onset_sample) / static_cast<double>(sr),
                s.beep_duration, 1e-3);
  }
}

INSTANTIATE_TEST_SUITE_P(Rates, DetectAtRate, ::testing::Values(8000, 16000, 20000, 44100, 48000, 192000));

TEST(Detect, DurationsAgreeAcrossRates) {
  const auto s = generate_schedule(10, 42);
  const auto d48 = analysis::interevent_durations(detect_event_boundaries(render_beep_track(s, 48000)));
  const auto d20 = analysis::interevent_durations(detect_event_boundaries(render_beep_track(s, 20000)));
  ASSERT_EQ(d48.size(), d20.size());
  for (std::size_t i = 0; i < d48.size(); ++i) EXPECT_NEAR(d48[i], d20[i], 1e-4);
}

TEST(Detect, DipShorterThanMinGapDoesNotSplit) {
  std::vector<float> x(10000, 0.0f);
  for (int i = 1000; i < 2000; ++i) x[static_cast<std::size_t>(i)] = 0.5f;
  for (int i = 2100; i < 3000; ++i) x[static_cast<std::size_t>(i)] = 0.5f;
  for (int i = 8000; i < 8100; ++i) x[static_cast<std::size_t>(i)] = -0.5f;
  DetectParams p;
  p.min_gap = 0.2;  // 200 samples at 1 kHz
  const auto b = detect_event_boundaries(AudioSignal(1000, x), p);
  ASSERT_EQ(b.events.size(), 2u);
  EXPECT_EQ(b.events[0], (EventSpan{1000, 2999}));
  EXPECT_EQ(b.events[1], (EventSpan{8000, 8099}));
}

TEST(Detect, SilenceThrowsNoEvents) {
  try {
    detect_event_boundaries(AudioSignal(48000, std::vector<float>(48000, 0.01f)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoEventsFound);
  }
}

TEST(Detect, RejectsBadThreshold) {
  DetectParams p;
  p.threshold = 0.0;
  EXPECT_THROW(detect_event_boundaries(AudioSignal(1000, std::vector<float>(10, 1.0f)), p), Error);
}
