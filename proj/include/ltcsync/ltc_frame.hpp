#pragma once

// SMPTE 12M linear timecode frame layout. Bit indices are in transmission
// order; multi-bit fields are sent least significant bit first.
//
//   0-3   frame units        4-7   user group 1
//   8-9   frame tens         10    drop frame       11  color frame
//   12-15 user group 2       16-19 second units     20-23 user group 3
//   24-26 second tens        27    polarity (24/30) or BGF0 (25)
//   28-31 user group 4       32-35 minute units     36-39 user group 5
//   40-42 minute tens        43    BGF0 (24/30) or BGF2 (25)
//   44-47 user group 6       48-51 hour units       52-55 user group 7
//   56-57 hour tens          58    BGF1             59  BGF2 (24/30) or polarity (25)
//   60-63 user group 8       64-79 sync word 0011111111111101

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltcsync/error.hpp"
#include "ltcsync/timebase.hpp"

namespace ltcsync::ltc {

inline constexpr std::size_t kFrameBits = 80;
inline constexpr std::size_t kSyncBits = 16;
inline constexpr std::size_t kSyncStart = 64;
inline constexpr std::array<std::uint8_t, kSyncBits> kSyncWord = {0, 0, 1, 1, 1, 1, 1, 1,
                                                                   1, 1, 1, 1, 1, 1, 0, 1};

using FrameBits = std::bitset<kFrameBits>;

struct FrameFlags {
  bool drop_frame = false;
  bool color_frame = false;
  bool bgf0 = false;
  bool bgf1 = false;
  bool bgf2 = false;

  friend bool operator==(const FrameFlags&, const FrameFlags&) = default;
};

struct LtcFrame {
  Timecode timecode;
  FrameFlags flags;
  std::uint32_t user_bits = 0;
  bool polarity_bit = false;

  friend bool operator==(const LtcFrame&, const LtcFrame&) = default;
};

namespace detail {

struct FlagPositions {
  std::size_t polarity;
  std::size_t bgf0;
  std::size_t bgf2;
};

constexpr FlagPositions flag_positions(FrameRate rate) noexcept {
  if (rate == FrameRate::Fps25) return {59, 27, 43};
  return {27, 43, 59};
}

inline void put_field(FrameBits& bits, std::size_t pos, std::size_t width, unsigned value) {
  for (std::size_t i = 0; i < width; ++i) bits[pos + i] = (value >> i) & 1u;
}

inline unsigned get_field(const FrameBits& bits, std::size_t pos, std::size_t width) {
  unsigned v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<unsigned>(bits[pos + i]) << i;
  return v;
}

constexpr std::array<std::size_t, 8> kUserGroupPos = {4, 12, 20, 28, 36, 44, 52, 60};

}  // namespace detail

inline bool has_sync_word(const FrameBits& bits) {
  for (std::size_t i = 0; i < kSyncBits; ++i) {
    if (bits[kSyncStart + i] != (kSyncWord[i] != 0)) return false;
  }
  return true;
}

inline FrameBits encode_frame(const Timecode& tc, const FrameFlags& flags = {},
                              std::uint32_t user_bits = 0) {
  require_valid(tc);
  using detail::put_field;
  const auto pos = detail::flag_positions(tc.rate);
  FrameBits bits;
  put_field(bits, 0, 4, static_cast<unsigned>(tc.frames % 10));
  put_field(bits, 8, 2, static_cast<unsigned>(tc.frames / 10));
  put_field(bits, 16, 4, static_cast<unsigned>(tc.seconds % 10));
  put_field(bits, 24, 3, static_cast<unsigned>(tc.seconds / 10));
  put_field(bits, 32, 4, static_cast<unsigned>(tc.minutes % 10));
  put_field(bits, 40, 3, static_cast<unsigned>(tc.minutes / 10));
  put_field(bits, 48, 4, static_cast<unsigned>(tc.hours % 10));
  put_field(bits, 56, 2, static_cast<unsigned>(tc.hours / 10));
  bits[10] = flags.drop_frame;
  bits[11] = flags.color_frame;
  bits[pos.bgf0] = flags.bgf0;
  bits[58] = flags.bgf1;
  bits[pos.bgf2] = flags.bgf2;
  for (std::size_t g = 0; g < detail::kUserGroupPos.size(); ++g) {
    put_field(bits, detail::kUserGroupPos[g], 4, (user_bits >> (4 * g)) & 0xfu);
  }
  for (std::size_t i = 0; i < kSyncBits; ++i) bits[kSyncStart + i] = kSyncWord[i] != 0;
  // Even number of zeros over the whole frame.
  bits[pos.polarity] = false;
  const std::size_t zeros = kFrameBits - bits.count();
  bits[pos.polarity] = (zeros % 2) == 1;
  return bits;
}

inline FrameBits encode_frame(const LtcFrame& frame) {
  return encode_frame(frame.timecode, frame.flags, frame.user_bits);
}

/// Decodes one 80-bit window whose last 16 bits must be the sync word.
inline LtcFrame decode_frame(const FrameBits& bits, FrameRate rate) {
  if (!has_sync_word(bits)) throw Error(ErrorCode::SyncWordMismatch, "bits 64-79 are not the sync word");
  using detail::get_field;
  const auto digit = [&](std::size_t p, std::size_t w, const char* name) {
    const unsigned v = get_field(bits, p, w);
    if (v > 9) throw Error(ErrorCode::InvalidBcdDigit, std::string(name) + " digit " + std::to_string(v));
    return static_cast<int>(v);
  };
  LtcFrame f;
  f.timecode.rate = rate;
  f.timecode.frames = digit(8, 2, "frame tens") * 10 + digit(0, 4, "frame units");
  f.timecode.seconds = digit(24, 3, "second tens") * 10 + digit(16, 4, "second units");
  f.timecode.minutes = digit(40, 3, "minute tens") * 10 + digit(32, 4, "minute units");
  f.timecode.hours = digit(56, 2, "hour tens") * 10 + digit(48, 4, "hour units");
  if (!f.timecode.valid()) {
    throw Error(ErrorCode::InvalidBcdDigit, "decoded fields out of range: " + to_string(f.timecode));
  }
  const auto pos = detail::flag_positions(rate);
  f.flags.drop_frame = bits[10];
  f.flags.color_frame = bits[11];
  f.flags.bgf0 = bits[pos.bgf0];
  f.flags.bgf1 = bits[58];
  f.flags.bgf2 = bits[pos.bgf2];
  for (std::size_t g = 0; g < detail::kUserGroupPos.size(); ++g) {
    f.user_bits |= get_field(bits, detail::kUserGroupPos[g], 4) << (4 * g);
  }
  f.polarity_bit = bits[pos.polarity];
  return f;
}

/// Indices just past each sync word in `bits`; each is a frame boundary.
inline std::vector<std::size_t> find_frame_boundaries(std::span<const std::uint8_t> bits) {
  std::vector<std::size_t> out;
  if (bits.size() < kSyncBits) return out;
  for (std::size_t i = 0; i + kSyncBits <= bits.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < kSyncBits && match; ++k) match = bits[i + k] == kSyncWord[k];
    if (match) out.push_back(i + kSyncBits);
  }
  return out;
}

inline std::vector<std::uint8_t> to_bit_vector(const FrameBits& bits) {
  std::vector<std::uint8_t> v(kFrameBits);
  for (std::size_t i = 0; i < kFrameBits; ++i) v[i] = bits[i] ? 1 : 0;
  return v;
}

inline FrameBits from_bit_span(std::span<const std::uint8_t> bits) {
  if (bits.size() != kFrameBits) throw Error(ErrorCode::InvalidArgument, "frame window must be 80 bits");
  FrameBits f;
  for (std::size_t i = 0; i < kFrameBits; ++i) f[i] = bits[i] != 0;
  return f;
}

}  // namespace ltcsync::ltc
