#include "ltcsync/ltc_stream.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace ltcsync;
using namespace ltcsync::ltc;

TEST(ExtractTimecodes, ConsecutiveFramesAdvanceByOneIncrement) {
  std::mt19937_64 rng(3);
  for (FrameRate rate : {FrameRate::Fps24, FrameRate::Fps25, FrameRate::Fps30}) {
    const Timecode start = gen::random_timecode(rng, rate);
    const auto sig = generate_ltc(start, 300, 48000);
    const int spb = static_cast<int>(std::lround(samples_per_bit(48000, rate)));
    const auto res = extract_timecodes(sig, spb, rate, 0);
    ASSERT_EQ(res.frames.size(), 300u);
    EXPECT_EQ(res.decode_failures, 0u);
    EXPECT_EQ(res.frames.front().timecode, start);
    for (std::size_t i = 1; i < res.frames.size(); ++i) {
      ASSERT_EQ(res.frames[i].timecode, timecode_increment(res.frames[i - 1].timecode));
    }
  }
}

TEST(ExtractTimecodes, AnchorsAreFrameStarts) {
  const auto sig = generate_ltc(Timecode{10, 0, 0, 0, FrameRate::Fps30}, 90, 192000);
  const auto res = extract_timecodes(sig, 80, FrameRate::Fps30);
  ASSERT_EQ(res.frames.size(), 90u);
  for (std::size_t i = 0; i < res.frames.size(); ++i) EXPECT_EQ(res.frames[i].anchor_sample, static_cast<std::int64_t>(6400 * i));
}

TEST(ExtractTimecodes, MidFrameStartSkipsPartialFrame) {
  const std::size_t total = 120;
  auto sig = generate_ltc(Timecode{0, 0, 0, 0, FrameRate::Fps30}, total, 192000);
  const std::size_t cut = 6400 / 2 + 123;
  sig.samples.erase(sig.samples.begin(), sig.samples.begin() + static_cast<std::ptrdiff_t>(cut));
  const auto res = extract_timecodes(sig, 80, FrameRate::Fps30);
  ASSERT_EQ(res.frames.size(), total - 1);
  EXPECT_EQ(res.frames.front().timecode, (Timecode{0, 0, 0, 1, FrameRate::Fps30}));
  EXPECT_EQ(res.frames.front().anchor_sample, static_cast<std::int64_t>(6400 - cut));
}

TEST(ExtractTimecodes, JitterAndNoiseStillDecode) {
  std::mt19937_64 rng(8);
  std::vector<std::uint8_t> bits;
  Timecode tc{5, 59, 58, 0, FrameRate::Fps30};
  std::vector<Timecode> expected;
  for (int i = 0; i < 200; ++i) {
    const auto v = to_bit_vector(encode_frame(tc));
    bits.insert(bits.end(), v.begin(), v.end());
    expected.push_back(tc);
    tc = timecode_increment(tc);
  }
  const auto periods = gen::jittered_periods(rng, bits.size(), 80, 3);
  auto sig = bmc::modulate_bits(bits, periods, 192000, 0.5f);
  gen::add_noise(sig.samples, 20.0, 1);
  const auto res = extract_timecodes(sig, 80, FrameRate::Fps30);
  ASSERT_EQ(res.frames.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(res.frames[i].timecode, expected[i]);
}

TEST(ExtractTimecodes, CorruptFrameCountsAsFailure) {
  std::vector<std::uint8_t> bits;
  Timecode tc{0, 0, 0, 0, FrameRate::Fps30};
  for (int i = 0; i < 10; ++i) {
    auto f = encode_frame(tc);
    if (i == 4) ltc::detail::put_field(f, 0, 4, 0xF);
    const auto v = to_bit_vector(f);
    bits.insert(bits.end(), v.begin(), v.end());
    tc = timecode_increment(tc);
  }
  const std::vector<int> periods(bits.size(), 20);
  const auto res = extract_timecodes(bmc::modulate_bits(bits, periods, 48000, 0.5f), 20, FrameRate::Fps30, 0);
  EXPECT_EQ(res.frames.size(), 9u);
  EXPECT_EQ(res.decode_failures, 1u);
}

TEST(ExtractTimecodes, SilenceHasNoCarrier) {
  const AudioSignal silence(192000, std::vector<float>(192000, 0.0f));
  EXPECT_THROW(extract_timecodes(silence, 80, FrameRate::Fps30), Error);
}
