#include "ltcsync/crosscorr.hpp"

#include <gtest/gtest.h>

#include <random>

#include "ltcsync/ltc_stream.hpp"

using namespace ltcsync;
using namespace ltcsync::xcorr;

namespace {

std::vector<float> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 0.3);
  std::vector<float> x(n);
  for (auto& v : x) v = static_cast<float>(d(rng));
  return x;
}

/// b[n] = x[n + s], zero outside x: b leads x by s samples.
std::vector<float> shifted(const std::vector<float>& x, std::int64_t s) {
  std::vector<float> b(x.size(), 0.0f);
  for (std::int64_t n = 0; n < static_cast<std::int64_t>(x.size()); ++n) {
    const std::int64_t k = n + s;
    if (k >= 0 && k < static_cast<std::int64_t>(x.size())) b[static_cast<std::size_t>(n)] = x[static_cast<std::size_t>(k)];
  }
  return b;
}

/// Direct O(N * L) search with the library's tie-break rule.
std::int64_t naive_lag(const std::vector<float>& a, const std::vector<float>& b, std::int64_t max_lag) {
  std::int64_t best_lag = 0;
  double best = -HUGE_VAL;
  for (std::int64_t lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(a.size()); ++n) {
      const std::int64_t m = n - lag;
      if (m < 0 || m >= static_cast<std::int64_t>(b.size())) continue;
      s += static_cast<double>(a[static_cast<std::size_t>(n)]) * static_cast<double>(b[static_cast<std::size_t>(m)]);
    }
    const bool take = s > best || (s == best && (std::llabs(lag) < std::llabs(best_lag) ||
                                                 (std::llabs(lag) == std::llabs(best_lag) && lag < best_lag)));
    if (take) {
      best = s;
      best_lag = lag;
    }
  }
  return best_lag;
}

}  // namespace

TEST(CrossCorr, AutocorrelationPeaksAtZero) {
  const auto x = noise(4096, 1);
  const auto m = crosscorr_lag(x, x, 48000, 512);
  EXPECT_EQ(m.lag_samples, 0);
  EXPECT_EQ(m.lag_seconds, 0.0);
}

TEST(CrossCorr, Shift79At192kHz) {
  const auto a = ltc::generate_ltc(Timecode{1, 0, 0, 0, FrameRate::Fps30}, 10, 192000);
  const AudioSignal b(192000, shifted(a.samples, 79));
  const auto m = crosscorr_lag(a, b, 6400);
  EXPECT_EQ(m.lag_samples, 79);
  EXPECT_DOUBLE_EQ(m.lag_seconds, 79.0 / 192000.0);
  EXPECT_NEAR(m.lag_seconds * 1e6, 411.46, 0.005);
}

TEST(CrossCorr, PositiveLagMeansBLeads) {
  // b has the feature 10 samples earlier than a.
  std::vector<float> a(200, 0.0f), b(200, 0.0f);
  a[110] = 1.0f;
  b[100] = 1.0f;
  EXPECT_EQ(crosscorr_lag(a, b, 1000, 50).lag_samples, 10);
  EXPECT_EQ(crosscorr_lag(b, a, 1000, 50).lag_samples, -10);
}

TEST(CrossCorr, ShiftRecoveryAndAntisymmetryRandom) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::int64_t max_lag = 256;
    const auto x = noise(2048 + rng() % 2048, rng());
    const std::int64_t s = static_cast<std::int64_t>(rng() % (max_lag + 1)) - max_lag / 2;
    const auto y = shifted(x, s);
    EXPECT_EQ(crosscorr_lag(x, y, 8000, max_lag).lag_samples, s);
    EXPECT_EQ(crosscorr_lag(y, x, 8000, max_lag).lag_samples, -s);
  }
}

TEST(CrossCorr, MatchesNaiveOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    const std::int64_t max_lag = 64 + static_cast<std::int64_t>(rng() % 200);
    const auto a = noise(1000 + rng() % 3000, rng());
    // Partially correlated pair with some independent noise.
    auto b = shifted(a, static_cast<std::int64_t>(rng() % 100) - 50);
    const auto n = noise(b.size(), rng());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.7f * n[i];
    EXPECT_EQ(crosscorr_lag(a, b, 1000, max_lag).lag_samples, naive_lag(a, b, max_lag)) << trial;
  }
}

TEST(CrossCorr, TieBreaksTowardSmallerMagnitude) {
  // Equal peaks at -3 and +5: the smaller |lag| wins.
  std::vector<float> a(64, 0.0f), b(64, 0.0f);
  a[20] = 1.0f;
  b[23] = 1.0f;
  b[15] = 1.0f;
  EXPECT_EQ(crosscorr_lag(a, b, 1000, 16).lag_samples, -3);
  EXPECT_EQ(naive_lag(a, b, 16), -3);
  // Exact +/- tie resolves to the negative lag.
  std::vector<float> c(64, 0.0f);
  c[24] = 1.0f;
  c[16] = 1.0f;
  EXPECT_EQ(crosscorr_lag(a, c, 1000, 16).lag_samples, -4);
}

TEST(CrossCorr, EnergyNormalisationFindsSameShift) {
  const auto x = noise(5000, 9);
  const auto y = shifted(x, -37);
  const auto m = crosscorr_lag(x, y, 1000, 400, Normalization::Energy);
  EXPECT_EQ(m.lag_samples, -37);
  EXPECT_NEAR(m.peak_correlation, 1.0, 1e-9);
}

TEST(CrossCorr, Errors) {
  const std::vector<float> x(100, 0.1f);
  try {
    crosscorr_lag(x, x, 1000, 51);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SignalTooShort);
  }
  try {
    crosscorr_lag(AudioSignal(48000, x), AudioSignal(44100, x), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SampleRateMismatch);
  }
  EXPECT_THROW(crosscorr_lag(x, x, 1000, -1), Error);
}
