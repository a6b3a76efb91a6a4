#pragma once

// Minimal RIFF/WAVE reader and writer for mono PCM: 16-bit integer or
// 32-bit IEEE float. Both sides stream so hour-long 192 kHz captures never
// need to sit in memory at once.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ltcsync/audio.hpp"
#include "ltcsync/error.hpp"

namespace ltcsync::wav {

enum class SampleFormat { Pcm16, Float32 };

namespace detail {

inline void put_u16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>(v >> 24)};
  os.write(b, 4);
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::int16_t to_pcm16(float x) {
  const float clamped = std::clamp(x, -1.0f, 1.0f);
  return static_cast<std::int16_t>(std::lrint(clamped * 32767.0f));
}

}  // namespace detail

class Writer {
 public:
  Writer(const std::string& path, std::int64_t sample_rate, SampleFormat format)
      : out_(path, std::ios::binary | std::ios::trunc), sample_rate_(sample_rate), format_(format) {
    if (!out_) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    if (sample_rate <= 0 || sample_rate > 0xffffffffLL) {
      throw Error(ErrorCode::InvalidArgument, "sample rate out of range");
    }
    write_header(0);
  }

  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  ~Writer() {
    try {
      close();
    } catch (...) {
    }
  }

  void write(std::span<const float> samples) {
    buffer_.clear();
    if (format_ == SampleFormat::Pcm16) {
      buffer_.resize(samples.size() * 2);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto v = static_cast<std::uint16_t>(detail::to_pcm16(samples[i]));
        buffer_[2 * i] = static_cast<char>(v & 0xff);
        buffer_[2 * i + 1] = static_cast<char>(v >> 8);
      }
    } else {
      buffer_.resize(samples.size() * 4);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &samples[i], 4);
        for (int k = 0; k < 4; ++k) buffer_[4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
      }
    }
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) throw Error(ErrorCode::Io, "write failed");
    frames_ += samples.size();
  }

  void close() {
    if (!out_.is_open()) return;
    const std::uint64_t data_bytes = frames_ * bytes_per_sample();
    if (data_bytes > 0xffffffffULL - 64) throw Error(ErrorCode::Io, "WAV data exceeds 4 GiB");
    out_.seekp(0);
    write_header(static_cast<std::uint32_t>(data_bytes));
    out_.close();
    if (!out_) throw Error(ErrorCode::Io, "failed to finalize WAV file");
  }

  std::uint64_t frames_written() const noexcept { return frames_; }

 private:
  std::uint32_t bytes_per_sample() const noexcept { return format_ == SampleFormat::Pcm16 ? 2 : 4; }

  void write_header(std::uint32_t data_bytes) {
    const bool is_float = format_ == SampleFormat::Float32;
    // Float data carries a fact chunk, as the format requires for non-PCM.
    const std::uint32_t fmt_size = is_float ? 18 : 16;
    const std::uint32_t fact_size = is_float ? 12 : 0;
    out_.write("RIFF", 4);
    detail::put_u32(out_, 4 + (8 + fmt_size) + fact_size + 8 + data_bytes);
    out_.write("WAVE", 4);
    out_.write("fmt ", 4);
    detail::put_u32(out_, fmt_size);
    detail::put_u16(out_, is_float ? 3 : 1);
    detail::put_u16(out_, 1);
    detail::put_u32(out_, static_cast<std::uint32_t>(sample_rate_));
    detail::put_u32(out_, static_cast<std::uint32_t>(sample_rate_) * bytes_per_sample());
    detail::put_u16(out_, static_cast<std::uint16_t>(bytes_per_sample()));
    detail::put_u16(out_, static_cast<std::uint16_t>(8 * bytes_per_sample()));
    if (is_float) {
      detail::put_u16(out_, 0);
      out_.write("fact", 4);
      detail::put_u32(out_, 4);
      detail::put_u32(out_, data_bytes / 4);
    }
    out_.write("data", 4);
    detail::put_u32(out_, data_bytes);
  }

  std::ofstream out_;
  std::int64_t sample_rate_;
  SampleFormat format_;
  std::uint64_t frames_ = 0;
  std::vector<char> buffer_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    parse_header();
  }

  std::int64_t sample_rate() const noexcept { return sample_rate_; }
  SampleFormat format() const noexcept { return format_; }
  std::uint64_t total_frames() const noexcept { return total_frames_; }

  /// Reads up to out.size() samples; returns the number read (0 at end).
  std::size_t read(std::span<float> out) {
    const std::uint64_t left = total_frames_ - consumed_;
    const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), left));
    if (n == 0) return 0;
    const std::size_t bps = format_ == SampleFormat::Pcm16 ? 2 : 4;
    raw_.resize(n * bps);
    in_.read(reinterpret_cast<char*>(raw_.data()), static_cast<std::streamsize>(raw_.size()));
    const auto got = static_cast<std::size_t>(in_.gcount()) / bps;
    for (std::size_t i = 0; i < got; ++i) {
      if (format_ == SampleFormat::Pcm16) {
        const auto v = static_cast<std::int16_t>(detail::get_u16(&raw_[2 * i]));
        out[i] = static_cast<float>(v) / 32767.0f;
      } else {
        const std::uint32_t bits = detail::get_u32(&raw_[4 * i]);
        std::memcpy(&out[i], &bits, 4);
      }
    }
    consumed_ += got;
    if (got < n) total_frames_ = consumed_;  // truncated file
    return got;
  }

 private:
  void parse_header() {
    unsigned char riff[12];
    if (!in_.read(reinterpret_cast<char*>(riff), 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
        std::memcmp(riff + 8, "WAVE", 4) != 0) {
      throw Error(ErrorCode::Parse, "'" + path_ + "' is not a RIFF/WAVE file");
    }
    bool have_fmt = false;
    unsigned char chunk[8];
    while (in_.read(reinterpret_cast<char*>(chunk), 8)) {
      const std::uint32_t size = detail::get_u32(chunk + 4);
      if (std::memcmp(chunk, "fmt ", 4) == 0) {
        std::vector<unsigned char> fmt(size);
        if (size < 16 || !in_.read(reinterpret_cast<char*>(fmt.data()), size)) {
          throw Error(ErrorCode::Parse, "truncated fmt chunk");
        }
        std::uint16_t tag = detail::get_u16(&fmt[0]);
        const std::uint16_t channels = detail::get_u16(&fmt[2]);
        sample_rate_ = detail::get_u32(&fmt[4]);
        const std::uint16_t bits = detail::get_u16(&fmt[14]);
        if (tag == 0xfffe && size >= 26) tag = detail::get_u16(&fmt[24]);  // WAVE_FORMAT_EXTENSIBLE
        if (channels != 1) throw Error(ErrorCode::Parse, "only mono WAV is supported");
        if (tag == 1 && bits == 16) {
          format_ = SampleFormat::Pcm16;
        } else if (tag == 3 && bits == 32) {
          format_ = SampleFormat::Float32;
        } else {
          throw Error(ErrorCode::Parse, "unsupported WAV encoding (need 16-bit PCM or 32-bit float)");
        }
        if (size % 2) in_.ignore(1);
        have_fmt = true;
      } else if (std::memcmp(chunk, "data", 4) == 0) {
        if (!have_fmt) throw Error(ErrorCode::Parse, "data chunk before fmt chunk");
        total_frames_ = size / (format_ == SampleFormat::Pcm16 ? 2 : 4);
        return;
      } else {
        in_.ignore(size + (size % 2));
      }
    }
    throw Error(ErrorCode::Parse, "'" + path_ + "' has no data chunk");
  }

  std::ifstream in_;
  std::string path_;
  std::int64_t sample_rate_ = 0;
  SampleFormat format_ = SampleFormat::Pcm16;
  std::uint64_t total_frames_ = 0;
  std::uint64_t consumed_ = 0;
  std::vector<unsigned char> raw_;
};

inline AudioSignal read_file(const std::string& path) {
  Reader reader(path);
  std::vector<float> samples(reader.total_frames());
  const std::size_t n = reader.read(samples);
  samples.resize(n);
  return AudioSignal(reader.sample_rate(), std::move(samples));
}

inline void write_file(const std::string& path, const AudioSignal& signal,
                       SampleFormat format = SampleFormat::Pcm16) {
  Writer writer(path, signal.sample_rate, format);
  writer.write(signal.samples);
  writer.close();
}

}  // namespace ltcsync::wav
