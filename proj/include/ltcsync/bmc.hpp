#pragma once

// Biphase mark code over audio. Every bit period starts with a level
// transition; a 1 bit adds a second transition at mid-period.
//
// The demodulator recovers the bit clock from the signal itself: after each
// bit-start anchor it looks for the steepest transition (largest
// |x[n] - x[n-1]|) within +/- search_halfwidth samples of the nominal
// period, and that transition anchors the next period. Periods that
// wander between 77 and 83 samples at a nominal 80 are tracked exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ltcsync/audio.hpp"
#include "ltcsync/error.hpp"
#include "ltcsync/ltc_frame.hpp"

namespace ltcsync::bmc {

/// Streaming BMC waveform generator. Levels are +/-amplitude.
class Modulator {
 public:
  explicit Modulator(float amplitude = 0.5f) : amplitude_(amplitude), high_(false) {}

  void append_bit(bool bit, int period, std::vector<float>& out) {
    if (period < 2) throw Error(ErrorCode::InvalidArgument, "bit period must be at least 2 samples");
    high_ = !high_;
    const int half = period / 2;
    out.insert(out.end(), static_cast<std::size_t>(half), level());
    if (bit) high_ = !high_;
    out.insert(out.end(), static_cast<std::size_t>(period - half), level());
  }

 private:
  float level() const noexcept { return high_ ? amplitude_ : -amplitude_; }

  float amplitude_;
  bool high_;
};

/// Bit periods for a bit clock that does not divide the sample rate evenly:
/// bit k ends at round((k + 1) * samples_per_bit).
class BitClock {
 public:
  explicit BitClock(double samples_per_bit) : spb_(samples_per_bit) {
    if (!(samples_per_bit >= 4.0)) throw Error(ErrorCode::InvalidArgument, "samples per bit must be >= 4");
  }

  int next_period() {
    const auto end = static_cast<std::int64_t>(std::llround(static_cast<double>(index_ + 1) * spb_));
    const auto period = static_cast<int>(end - boundary_);
    boundary_ = end;
    ++index_;
    return period;
  }

 private:
  double spb_;
  std::int64_t index_ = 0;
  std::int64_t boundary_ = 0;
};

inline AudioSignal modulate_bits(std::span<const std::uint8_t> bits, std::span<const int> periods,
                                 std::int64_t sample_rate, float amplitude) {
  if (bits.size() != periods.size()) throw Error(ErrorCode::InvalidArgument, "one period per bit required");
  Modulator mod(amplitude);
  std::vector<float> out;
  std::size_t total = 0;
  for (int p : periods) total += static_cast<std::size_t>(std::max(p, 0));
  out.reserve(total);
  for (std::size_t i = 0; i < bits.size(); ++i) mod.append_bit(bits[i] != 0, periods[i], out);
  return AudioSignal(sample_rate, std::move(out));
}

/// Fixed-period modulation of consecutive frames.
inline AudioSignal modulate(std::span<const ltc::FrameBits> frames, int samples_per_bit, float amplitude,
                            std::int64_t sample_rate) {
  if (samples_per_bit < 4) throw Error(ErrorCode::InvalidArgument, "samples_per_bit must be >= 4");
  Modulator mod(amplitude);
  std::vector<float> out;
  out.reserve(frames.size() * ltc::kFrameBits * static_cast<std::size_t>(samples_per_bit));
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < ltc::kFrameBits; ++i) mod.append_bit(f[i], samples_per_bit, out);
  }
  return AudioSignal(sample_rate, std::move(out));
}

struct DemodBit {
  std::uint8_t value = 0;
  /// First bit after (re)acquiring the clock; earlier bits are not contiguous with it.
  bool resync = false;
  /// Absolute sample index of the bit-start transition.
  std::int64_t start_sample = 0;
};

struct DemodOptions {
  int nominal_samples_per_bit = 80;
  /// Anchor search window is +/- this many samples; <= 0 selects a default
  /// of clamp(nominal / 8, 1, 3), i.e. 3 at 80 samples per bit.
  int search_halfwidth = 3;
  /// A transition counts when its inter-sample swing exceeds this fraction
  /// of the running peak-to-peak estimate.
  double transition_fraction = 0.5;
  /// Peak-to-peak level below which a window is treated as silence.
  double min_peak_to_peak = 1e-3;
};

inline int default_search_halfwidth(int nominal) { return std::clamp(nominal / 8, 1, 3); }

/// Streaming demodulator. Single owner; feed samples in order with push(),
/// then call finish() once at end of stream.
class Demodulator {
 public:
  explicit Demodulator(DemodOptions opts) : opts_(opts) {
    if (opts_.nominal_samples_per_bit < 4) {
      throw Error(ErrorCode::InvalidArgument, "nominal samples per bit must be >= 4");
    }
    if (opts_.search_halfwidth <= 0) opts_.search_halfwidth = default_search_halfwidth(opts_.nominal_samples_per_bit);
    if (opts_.search_halfwidth >= opts_.nominal_samples_per_bit / 2) {
      throw Error(ErrorCode::InvalidArgument, "search half-width must be below half a bit period");
    }
  }

  void push(std::span<const float> samples, std::vector<DemodBit>& out) {
    buf_.insert(buf_.end(), samples.begin(), samples.end());
    run(false, out);
  }

  void finish(std::vector<DemodBit>& out) {
    run(true, out);
    state_ = State::Done;
  }

  std::uint64_t lock_losses() const noexcept { return lock_losses_; }
  std::uint64_t bits_emitted() const noexcept { return bits_emitted_; }
  const DemodOptions& options() const noexcept { return opts_; }

 private:
  enum class State { Acquiring, Locked, Done };

  std::int64_t end() const noexcept { return base_ + static_cast<std::int64_t>(buf_.size()); }
  float x(std::int64_t n) const noexcept { return buf_[static_cast<std::size_t>(n - base_)]; }
  double swing(std::int64_t n) const noexcept { return std::fabs(static_cast<double>(x(n)) - x(n - 1)); }

  // Earliest index of the largest swing over [lo, hi]; lo > base_.
  std::int64_t steepest(std::int64_t lo, std::int64_t hi) const noexcept {
    std::int64_t best = lo;
    double best_v = -1.0;
    for (std::int64_t n = lo; n <= hi; ++n) {
      const double v = swing(n);
      if (v > best_v) {
        best_v = v;
        best = n;
      }
    }
    return best;
  }

  void run(bool final, std::vector<DemodBit>& out) {
    while (state_ != State::Done) {
      const bool progressed = state_ == State::Acquiring ? acquire(final, out) : track(final, out);
      if (!progressed) break;
    }
    trim();
  }

  // Locks onto the first pair of consecutive transitions one bit period
  // apart; with no transition between them the first one is a bit start.
  bool acquire(bool final, std::vector<DemodBit>& out) {
    const std::int64_t n = opts_.nominal_samples_per_bit;
    const std::int64_t hw = opts_.search_halfwidth;
    const std::int64_t window = 4 * n;
    scan_ = std::max(scan_, base_ + 1);
    if (!final && scan_ + window > end()) return false;
    const std::int64_t stop = std::min(end(), scan_ + window);
    if (stop - scan_ < n + hw) {
      if (final) state_ = State::Done;
      return false;
    }
    float lo = x(scan_ - 1), hi = lo;
    for (std::int64_t i = scan_; i < stop; ++i) {
      lo = std::min(lo, x(i));
      hi = std::max(hi, x(i));
    }
    const double p2p = static_cast<double>(hi) - lo;
    if (p2p >= opts_.min_peak_to_peak) {
      const double threshold = opts_.transition_fraction * p2p;
      const std::int64_t merge = std::max<std::int64_t>(1, n / 4);
      transitions_.clear();
      for (std::int64_t i = scan_; i < stop; ++i) {
        const double v = swing(i);
        if (v < threshold) continue;
        if (!transitions_.empty() && i - transitions_.back() <= merge) {
          if (v > swing(transitions_.back())) transitions_.back() = i;
          continue;
        }
        transitions_.push_back(i);
      }
      for (std::size_t k = 0; k + 1 < transitions_.size(); ++k) {
        const std::int64_t gap = transitions_[k + 1] - transitions_[k];
        if (gap >= n - hw && gap <= n + hw) {
          anchor_ = transitions_[k];
          level_ = swing(anchor_);
          resync_ = true;
          state_ = State::Locked;
          if (!ever_locked_) backtrack(out, threshold);
          ever_locked_ = true;
          return true;
        }
      }
    }
    if (stop >= end() && final) {
      state_ = State::Done;
      return false;
    }
    scan_ += 2 * n;
    return true;
  }

  bool track(bool final, std::vector<DemodBit>& out) {
    const std::int64_t n = opts_.nominal_samples_per_bit;
    const std::int64_t hw = opts_.search_halfwidth;
    const std::int64_t want = anchor_ + n + hw + 1;
    if (want > end() && !final) return false;
    const double threshold = opts_.transition_fraction * level_;

    const std::int64_t lo = anchor_ + n - hw;
    const std::int64_t hi = std::min(anchor_ + n + hw, end() - 1);
    std::int64_t next = -1;
    if (lo <= hi) {
      const std::int64_t cand = steepest(lo, hi);
      if (swing(cand) >= threshold) next = cand;
    }

    if (next < 0) {
      if (want > end()) {
        // End of stream: the final bit has no closing transition.
        const std::int64_t mid_hi = anchor_ + 3 * n / 4;
        if (mid_hi < end()) emit(classify(anchor_ + n / 4, mid_hi, threshold), out);
        state_ = State::Done;
        return false;
      }
      ++lock_losses_;
      state_ = State::Acquiring;
      scan_ = anchor_ + 1;
      return true;
    }

    const std::int64_t period = next - anchor_;
    emit(classify(anchor_ + period / 4, anchor_ + 3 * period / 4, threshold), out);
    level_ = 0.875 * level_ + 0.125 * swing(next);
    anchor_ = next;
    return true;
  }

  // Recovers the bits between the start of the stream and the first lock by
  // walking the clock backwards. Sample 0 counts as a bit start when it
  // falls inside the search window, since it has no predecessor to diff.
  void backtrack(std::vector<DemodBit>& out, double threshold) {
    const std::int64_t n = opts_.nominal_samples_per_bit;
    const std::int64_t hw = opts_.search_halfwidth;
    std::vector<std::int64_t> starts;
    std::int64_t a = anchor_;
    while (true) {
      const std::int64_t lo = a - n - hw;
      const std::int64_t hi = a - n + hw;
      if (hi < 0 || (lo < base_ + 1 && base_ > 0)) break;
      std::int64_t prev = -1;
      if (hi >= 1) {
        const std::int64_t cand = steepest(std::max<std::int64_t>(lo, 1), hi);
        if (swing(cand) >= threshold) prev = cand;
      }
      if (prev < 0 && lo <= 0) prev = 0;
      if (prev < 0) break;
      starts.push_back(prev);
      a = prev;
      if (prev == 0) break;
    }
    std::int64_t next = anchor_;
    std::vector<DemodBit> bits(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const std::int64_t start = starts[i];
      const std::int64_t period = next - start;
      bits[starts.size() - 1 - i] =
          DemodBit{classify(std::max<std::int64_t>(start + period / 4, 1), start + 3 * period / 4, threshold),
                   false, start};
      next = start;
    }
    if (!bits.empty()) {
      bits.front().resync = true;
      resync_ = false;
      bits_emitted_ += bits.size();
      out.insert(out.end(), bits.begin(), bits.end());
    }
  }

  std::uint8_t classify(std::int64_t lo, std::int64_t hi, double threshold) const noexcept {
    return swing(steepest(lo, hi)) >= threshold ? 1 : 0;
  }

  void emit(std::uint8_t bit, std::vector<DemodBit>& out) {
    out.push_back(DemodBit{bit, resync_, anchor_});
    resync_ = false;
    ++bits_emitted_;
  }

  void trim() {
    // Before the first lock everything is kept for backtracking, up to a cap.
    if (!ever_locked_ && buf_.size() < (std::size_t{1} << 22)) return;
    std::int64_t keep_from = state_ == State::Locked ? anchor_ - 1 : scan_ - 1;
    keep_from = std::min(keep_from, end());
    const std::int64_t drop = keep_from - base_;
    if (drop > (1 << 16)) {
      buf_.erase(buf_.begin(), buf_.begin() + drop);
      base_ += drop;
    }
  }

  DemodOptions opts_;
  State state_ = State::Acquiring;
  std::vector<float> buf_;
  std::int64_t base_ = 0;
  std::int64_t scan_ = 1;
  std::int64_t anchor_ = 0;
  double level_ = 0.0;
  bool resync_ = false;
  bool ever_locked_ = false;
  std::uint64_t lock_losses_ = 0;
  std::uint64_t bits_emitted_ = 0;
  std::vector<std::int64_t> transitions_;
};

struct BitStream {
  std::vector<std::uint8_t> bits;
  std::vector<std::int64_t> bit_starts;
  std::vector<std::size_t> resync_positions;
  std::uint64_t lock_losses = 0;
};

/// Whole-signal demodulation. Throws NoCarrierDetected when no bit clock
/// can be recovered.
inline BitStream demodulate(const AudioSignal& sig, int nominal_samples_per_bit, int search_halfwidth = 3) {
  Demodulator demod(DemodOptions{nominal_samples_per_bit, search_halfwidth});
  std::vector<DemodBit> raw;
  demod.push(sig.samples, raw);
  demod.finish(raw);
  if (raw.empty()) throw Error(ErrorCode::NoCarrierDetected, "no biphase-mark transitions found");
  BitStream bs;
  bs.bits.reserve(raw.size());
  bs.bit_starts.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].resync) bs.resync_positions.push_back(i);
    bs.bits.push_back(raw[i].value);
    bs.bit_starts.push_back(raw[i].start_sample);
  }
  bs.lock_losses = demod.lock_losses();
  return bs;
}

}  // namespace ltcsync::bmc
