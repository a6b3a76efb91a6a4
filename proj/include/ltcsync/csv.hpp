#pragma once

// Plain CSV files used by the toolkit. One header row, comma-separated,
// no quoting. Lines starting with '#' are comments; "# key=value" comments
// carry metadata such as the sample rate of a boundaries file.
//
//   schedule     onset_seconds
//   boundaries   onset_sample,offset_sample          (# sample_rate=N)
//   durations    duration_seconds
//   offsets      t_seconds,offset_seconds
//   anchors      anchor_sample,timecode
//   lag pairs    wav_a,wav_b

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ltcsync/analysis.hpp"
#include "ltcsync/error.hpp"
#include "ltcsync/events.hpp"
#include "ltcsync/ltc_stream.hpp"
#include "ltcsync/timebase.hpp"

namespace ltcsync::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> meta;
};

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.emplace_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline Table parse(std::istream& in, const std::string& name = "input") {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        t.meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw Error(ErrorCode::Parse, name + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                                        " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw Error(ErrorCode::Parse, name + ": missing header row");
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse(in, path);
}

inline void expect_header(const Table& t, const std::vector<std::string>& want, const std::string& what) {
  if (t.header != want) {
    std::string w;
    for (const auto& s : want) w += (w.empty() ? "" : ",") + s;
    throw Error(ErrorCode::Parse, what + ": expected header '" + w + "'");
  }
}

template <class T>
T parse_number(const std::string& s) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw Error(ErrorCode::Parse, "not a number: '" + s + "'");
  return v;
}

/// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------

inline void write_schedule(std::ostream& out, const events::EventSchedule& s) {
  out << "onset_seconds\n";
  for (double t : s.onsets) out << format_number(t) << '\n';
}

inline events::EventSchedule read_schedule(const std::string& path, double beep_duration) {
  const auto t = read_file(path);
  expect_header(t, {"onset_seconds"}, path);
  events::EventSchedule s;
  s.beep_duration = beep_duration;
  for (const auto& r : t.rows) s.onsets.push_back(parse_number<double>(r[0]));
  for (std::size_t i = 1; i < s.onsets.size(); ++i) {
    if (!(s.onsets[i] > s.onsets[i - 1])) throw Error(ErrorCode::Parse, path + ": onsets must increase");
  }
  return s;
}

inline void write_boundaries(std::ostream& out, const events::EventBoundaries& b) {
  out << "# sample_rate=" << b.sample_rate << "\nonset_sample,offset_sample\n";
  for (const auto& e : b.events) out << e.onset_sample << ',' << e.offset_sample << '\n';
}

inline events::EventBoundaries boundaries_from(const Table& t, const std::string& path) {
  expect_header(t, {"onset_sample", "offset_sample"}, path);
  const auto it = t.meta.find("sample_rate");
  if (it == t.meta.end()) throw Error(ErrorCode::Parse, path + ": missing '# sample_rate=' line");
  events::EventBoundaries b;
  b.sample_rate = parse_number<std::int64_t>(it->second);
  for (const auto& r : t.rows) {
    b.events.push_back(events::EventSpan{parse_number<std::int64_t>(r[0]), parse_number<std::int64_t>(r[1])});
  }
  return b;
}

inline void write_durations(std::ostream& out, const std::vector<double>& d) {
  out << "duration_seconds\n";
  for (double v : d) out << format_number(v) << '\n';
}

/// Durations from either a durations file or a boundaries file.
inline std::vector<double> read_durations(const std::string& path) {
  const auto t = read_file(path);
  if (t.header == std::vector<std::string>{"duration_seconds"}) {
    std::vector<double> d;
    for (const auto& r : t.rows) d.push_back(parse_number<double>(r[0]));
    return d;
  }
  return analysis::interevent_durations(boundaries_from(t, path));
}

inline std::vector<analysis::OffsetSample> read_offsets(const std::string& path) {
  const auto t = read_file(path);
  expect_header(t, {"t_seconds", "offset_seconds"}, path);
  std::vector<analysis::OffsetSample> s;
  for (const auto& r : t.rows) s.push_back({parse_number<double>(r[0]), parse_number<double>(r[1])});
  return s;
}

inline void write_offsets(std::ostream& out, const std::vector<analysis::OffsetSample>& s) {
  out << "t_seconds,offset_seconds\n";
  for (const auto& p : s) out << format_number(p.t) << ',' << format_number(p.offset) << '\n';
}

inline void write_anchors(std::ostream& out, const std::vector<ltc::TimecodeAnchor>& a) {
  out << "anchor_sample,timecode\n";
  for (const auto& f : a) out << f.anchor_sample << ',' << to_string(f.timecode) << '\n';
}

inline std::vector<ltc::TimecodeAnchor> read_anchors(const std::string& path, FrameRate rate) {
  const auto t = read_file(path);
  expect_header(t, {"anchor_sample", "timecode"}, path);
  std::vector<ltc::TimecodeAnchor> a;
  for (const auto& r : t.rows) a.push_back({parse_timecode(r[1], rate), parse_number<std::int64_t>(r[0])});
  return a;
}

inline std::vector<std::pair<std::string, std::string>> read_lag_pairs(const std::string& path) {
  const auto t = read_file(path);
  expect_header(t, {"wav_a", "wav_b"}, path);
  std::vector<std::pair<std::string, std::string>> p;
  for (const auto& r : t.rows) p.emplace_back(r[0], r[1]);
  return p;
}

}  // namespace ltcsync::csv
