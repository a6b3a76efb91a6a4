#pragma once

// Integer-sample lag between two recordings by maximum cross-correlation.
//
//   c(L) = sum_n a[n] * b[n - L]      over the overlap of a and b
//
// A positive lag means b leads a: b[n] ~ a[n + L]. The full correlation is
// computed by FFT, then every lag whose FFT value is within rounding
// distance of the maximum is re-evaluated exactly in the time domain, so the
// chosen lag (and its tie-breaking) does not depend on FFT rounding.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "ltcsync/audio.hpp"
#include "ltcsync/error.hpp"

namespace ltcsync::xcorr {

enum class Normalization {
  /// Raw sum of products over the overlap.
  None,
  /// Divided by sqrt(energy of a * energy of b) over the overlap.
  Energy,
};

struct LagMeasurement {
  std::int64_t lag_samples = 0;
  std::int64_t sample_rate = 0;
  double lag_seconds = 0.0;
  double peak_correlation = 0.0;
};

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

inline std::size_t fft_size(std::size_t min_len) {
  std::size_t n = 1;
  while (n < min_len) n <<= 1;
  return n;
}

/// Full linear cross-correlation for lags in [-max_lag, max_lag]; entry
/// k corresponds to lag k - max_lag.
inline std::vector<double> fft_correlation(std::span<const float> a, std::span<const float> b, std::int64_t max_lag) {
  const std::size_t n = fft_size(a.size() + b.size());
  const std::size_t bins = n / 2 + 1;
  auto ra = fftw_buffer<double>(n);
  auto rb = fftw_buffer<double>(n);
  auto fa = fftw_buffer<fftw_complex>(bins);
  auto fb = fftw_buffer<fftw_complex>(bins);
  Plan pa, pb, inv;
  {
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(n);
    pa.reset(fftw_plan_dft_r2c_1d(len, ra.get(), fa.get(), FFTW_ESTIMATE));
    pb.reset(fftw_plan_dft_r2c_1d(len, rb.get(), fb.get(), FFTW_ESTIMATE));
    inv.reset(fftw_plan_dft_c2r_1d(len, fa.get(), ra.get(), FFTW_ESTIMATE));
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(pa.get());
  fftw_execute(pb.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const std::complex<double> x(fa[k][0], fa[k][1]);
    const std::complex<double> y(fb[k][0], fb[k][1]);
    const auto z = x * std::conj(y);
    fa[k][0] = z.real();
    fa[k][1] = z.imag();
  }
  fftw_execute(inv.get());
  std::vector<double> out(static_cast<std::size_t>(2 * max_lag + 1));
  const double scale = 1.0 / static_cast<double>(n);
  for (std::int64_t lag = -max_lag; lag <= max_lag; ++lag) {
    const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag) : n - static_cast<std::size_t>(-lag);
    out[static_cast<std::size_t>(lag + max_lag)] = ra[idx] * scale;
  }
  return out;
}

/// Overlap range of n for a given lag: 0 <= n < |a| and 0 <= n - lag < |b|.
inline std::pair<std::int64_t, std::int64_t> overlap(std::size_t na, std::size_t nb, std::int64_t lag) {
  const std::int64_t lo = std::max<std::int64_t>(0, lag);
  const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(na), static_cast<std::int64_t>(nb) + lag);
  return {lo, hi};
}

inline double exact_correlation(std::span<const float> a, std::span<const float> b, std::int64_t lag) {
  const auto [lo, hi] = overlap(a.size(), b.size(), lag);
  double s = 0.0;
  for (std::int64_t n = lo; n < hi; ++n) {
    s += static_cast<double>(a[static_cast<std::size_t>(n)]) * static_cast<double>(b[static_cast<std::size_t>(n - lag)]);
  }
  return s;
}

inline double energy(std::span<const float> x, std::int64_t lo, std::int64_t hi) {
  double s = 0.0;
  for (std::int64_t n = lo; n < hi; ++n) s += static_cast<double>(x[static_cast<std::size_t>(n)]) * x[static_cast<std::size_t>(n)];
  return s;
}

inline double normalised(std::span<const float> a, std::span<const float> b, std::int64_t lag, double raw) {
  const auto [lo, hi] = overlap(a.size(), b.size(), lag);
  const double den = std::sqrt(energy(a, lo, hi) * energy(b, lo - lag, hi - lag));
  return den > 0.0 ? raw / den : 0.0;
}

/// True when (value, lag) beats (best, best_lag): larger value, then smaller
/// |lag|, then the negative lag of a +/- pair.
inline bool better(double value, std::int64_t lag, double best, std::int64_t best_lag) {
  if (value != best) return value > best;
  const auto al = std::llabs(lag), bl = std::llabs(best_lag);
  if (al != bl) return al < bl;
  return lag < best_lag;
}

}  // namespace detail

/// Lag maximising the cross-correlation over [-max_lag, max_lag].
inline LagMeasurement crosscorr_lag(std::span<const float> a, std::span<const float> b, std::int64_t sample_rate,
                                    std::int64_t max_lag, Normalization norm = Normalization::None) {
  if (max_lag < 0) throw Error(ErrorCode::InvalidArgument, "max_lag must be non-negative");
  const auto need = static_cast<std::size_t>(2 * max_lag);
  if (a.size() < need || b.size() < need || a.empty() || b.empty()) {
    throw Error(ErrorCode::SignalTooShort, "signals must be at least 2 * max_lag samples long");
  }
  const auto fft = detail::fft_correlation(a, b, max_lag);

  // Per-lag score on the FFT values, with the same normalisation as the exact pass.
  std::vector<double> score(fft.size());
  std::vector<double> ea, eb;  // prefix energies
  if (norm == Normalization::Energy) {
    ea.assign(a.size() + 1, 0.0);
    eb.assign(b.size() + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) ea[i + 1] = ea[i] + static_cast<double>(a[i]) * a[i];
    for (std::size_t i = 0; i < b.size(); ++i) eb[i + 1] = eb[i] + static_cast<double>(b[i]) * b[i];
  }
  double top = -HUGE_VAL;
  for (std::size_t k = 0; k < fft.size(); ++k) {
    const std::int64_t lag = static_cast<std::int64_t>(k) - max_lag;
    double v = fft[k];
    if (norm == Normalization::Energy) {
      const auto [lo, hi] = detail::overlap(a.size(), b.size(), lag);
      const double den = hi > lo ? std::sqrt((ea[static_cast<std::size_t>(hi)] - ea[static_cast<std::size_t>(lo)]) *
                                             (eb[static_cast<std::size_t>(hi - lag)] - eb[static_cast<std::size_t>(lo - lag)]))
                                 : 0.0;
      v = den > 0.0 ? v / den : 0.0;
    }
    score[k] = v;
    top = std::max(top, v);
  }

  // FFT rounding is bounded by a small multiple of eps * log2(n) * |a| * |b|.
  double scale = 1.0;
  if (norm == Normalization::None) {
    scale = std::sqrt(detail::energy(a, 0, static_cast<std::int64_t>(a.size())) *
                      detail::energy(b, 0, static_cast<std::int64_t>(b.size())));
  }
  const double slack = 1e-9 * scale + 1e-12;

  LagMeasurement best;
  best.sample_rate = sample_rate;
  bool have = false;
  for (std::size_t k = 0; k < score.size(); ++k) {
    if (score[k] < top - slack) continue;
    const std::int64_t lag = static_cast<std::int64_t>(k) - max_lag;
    double v = detail::exact_correlation(a, b, lag);
    if (norm == Normalization::Energy) v = detail::normalised(a, b, lag, v);
    if (!have || detail::better(v, lag, best.peak_correlation, best.lag_samples)) {
      best.lag_samples = lag;
      best.peak_correlation = v;
      have = true;
    }
  }
  best.lag_seconds = static_cast<double>(best.lag_samples) / static_cast<double>(sample_rate);
  return best;
}

inline LagMeasurement crosscorr_lag(const AudioSignal& a, const AudioSignal& b, std::int64_t max_lag,
                                    Normalization norm = Normalization::None) {
  if (a.sample_rate != b.sample_rate) {
    throw Error(ErrorCode::SampleRateMismatch,
                std::to_string(a.sample_rate) + " Hz vs " + std::to_string(b.sample_rate) + " Hz");
  }
  return crosscorr_lag(a.samples, b.samples, a.sample_rate, max_lag, norm);
}

}  // namespace ltcsync::xcorr
