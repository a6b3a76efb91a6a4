#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ltcsync/error.hpp"

namespace ltcsync {

/// Mono PCM buffer; samples are nominally in [-1, 1].
struct AudioSignal {
  std::int64_t sample_rate = 0;
  std::vector<float> samples;

  AudioSignal() = default;
  AudioSignal(std::int64_t rate, std::vector<float> data) : sample_rate(rate), samples(std::move(data)) {
    if (rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }

  std::size_t size() const noexcept { return samples.size(); }
  double duration_seconds() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / static_cast<double>(sample_rate)
                           : 0.0;
  }
};

}  // namespace ltcsync
