#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ltcsync/audio.hpp"
#include "ltcsync/bmc.hpp"
#include "ltcsync/error.hpp"
#include "ltcsync/ltc_frame.hpp"
#include "ltcsync/timebase.hpp"

namespace ltcsync::ltc {

/// Exact samples per bit for an LTC stream, 80 bits per frame.
inline double samples_per_bit(std::int64_t sample_rate, FrameRate rate) {
  return static_cast<double>(sample_rate) / (static_cast<double>(fps(rate)) * kFrameBits);
}

/// Emits consecutive LTC frames as BMC audio, starting at a given timecode.
class Encoder {
 public:
  Encoder(const Timecode& start, std::int64_t sample_rate, float amplitude = 0.5f, FrameFlags flags = {},
          std::uint32_t user_bits = 0)
      : next_(start), flags_(flags), user_bits_(user_bits), clock_(samples_per_bit(sample_rate, start.rate)),
        modulator_(amplitude) {
    require_valid(start);
  }

  /// Appends one frame of audio and advances the timecode.
  void append_frame(std::vector<float>& out) {
    const FrameBits bits = encode_frame(next_, flags_, user_bits_);
    for (std::size_t i = 0; i < kFrameBits; ++i) modulator_.append_bit(bits[i], clock_.next_period(), out);
    next_ = timecode_increment(next_);
  }

  const Timecode& next_timecode() const noexcept { return next_; }

 private:
  Timecode next_;
  FrameFlags flags_;
  std::uint32_t user_bits_;
  bmc::BitClock clock_;
  bmc::Modulator modulator_;
};

struct TimecodeAnchor {
  Timecode timecode;
  /// Sample index where the frame's first bit starts.
  std::int64_t anchor_sample = 0;

  friend bool operator==(const TimecodeAnchor&, const TimecodeAnchor&) = default;
};

struct DecodedFrame {
  LtcFrame frame;
  std::int64_t anchor_sample = 0;
};

/// Streaming audio-to-timecode decoder. Frames are reported once their sync
/// word has been demodulated; bits before the first sync word are skipped.
class Decoder {
 public:
  Decoder(FrameRate rate, bmc::DemodOptions opts) : rate_(rate), demod_(opts) {}

  void push(std::span<const float> samples, std::vector<DecodedFrame>& out) {
    bits_.clear();
    demod_.push(samples, bits_);
    consume(out);
  }

  void finish(std::vector<DecodedFrame>& out) {
    bits_.clear();
    demod_.finish(bits_);
    consume(out);
  }

  std::uint64_t decode_failures() const noexcept { return failures_; }
  std::uint64_t lock_losses() const noexcept { return demod_.lock_losses(); }
  std::uint64_t bits_demodulated() const noexcept { return demod_.bits_emitted(); }

 private:
  void consume(std::vector<DecodedFrame>& out) {
    for (const auto& b : bits_) {
      if (b.resync) filled_ = 0;
      history_[head_] = b;
      head_ = (head_ + 1) % kFrameBits;
      if (filled_ < kFrameBits) ++filled_;
      if (filled_ == kFrameBits && tail_is_sync()) decode_window(out);
    }
  }

  // Oldest-first access into the 80-bit ring.
  const bmc::DemodBit& at(std::size_t i) const noexcept { return history_[(head_ + i) % kFrameBits]; }

  bool tail_is_sync() const noexcept {
    for (std::size_t k = 0; k < kSyncBits; ++k) {
      if (at(kSyncStart + k).value != kSyncWord[k]) return false;
    }
    return true;
  }

  void decode_window(std::vector<DecodedFrame>& out) {
    FrameBits bits;
    for (std::size_t i = 0; i < kFrameBits; ++i) bits[i] = at(i).value != 0;
    try {
      out.push_back(DecodedFrame{decode_frame(bits, rate_), at(0).start_sample});
    } catch (const Error&) {
      ++failures_;
    }
  }

  FrameRate rate_;
  bmc::Demodulator demod_;
  std::vector<bmc::DemodBit> bits_;
  std::array<bmc::DemodBit, kFrameBits> history_{};
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::uint64_t failures_ = 0;
};

struct ExtractResult {
  std::vector<TimecodeAnchor> frames;
  std::uint64_t decode_failures = 0;
  std::uint64_t lock_losses = 0;
};

/// Demodulates and decodes every complete frame in `sig`.
inline ExtractResult extract_timecodes(const AudioSignal& sig, int nominal_samples_per_bit, FrameRate rate,
                                       int search_halfwidth = 3) {
  Decoder decoder(rate, bmc::DemodOptions{nominal_samples_per_bit, search_halfwidth});
  std::vector<DecodedFrame> frames;
  decoder.push(sig.samples, frames);
  decoder.finish(frames);
  if (decoder.bits_demodulated() == 0) {
    throw Error(ErrorCode::NoCarrierDetected, "no biphase-mark transitions found");
  }
  ExtractResult r;
  r.frames.reserve(frames.size());
  for (const auto& f : frames) r.frames.push_back(TimecodeAnchor{f.frame.timecode, f.anchor_sample});
  r.decode_failures = decoder.decode_failures();
  r.lock_losses = decoder.lock_losses();
  return r;
}

/// Encodes `frame_count` consecutive frames from `start` into one signal.
inline AudioSignal generate_ltc(const Timecode& start, std::size_t frame_count, std::int64_t sample_rate,
                                float amplitude = 0.5f) {
  Encoder enc(start, sample_rate, amplitude);
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(frame_count) * sample_rate / fps(start.rate)) + 16);
  for (std::size_t i = 0; i < frame_count; ++i) enc.append_frame(out);
  return AudioSignal(sample_rate, std::move(out));
}

}  // namespace ltcsync::ltc
