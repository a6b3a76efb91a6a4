#pragma once

// Command-line front end. run() parses arguments and dispatches; it writes
// only to the given streams so tests can drive it in-process.
//
// Exit status: 0 when the command completed, 1 on errors, 2 when --strict
// is set and a tolerance verdict failed. Argument errors use CLI11's codes.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ltcsync/ltcsync.hpp"

namespace ltcsync::cli {

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline wav::SampleFormat parse_format(const std::string& s) {
  if (s == "pcm16") return wav::SampleFormat::Pcm16;
  if (s == "float32") return wav::SampleFormat::Float32;
  throw Error(ErrorCode::InvalidArgument, "unknown WAV format '" + s + "' (pcm16 or float32)");
}

inline int nominal_bit_period(std::int64_t sample_rate, FrameRate rate) {
  return static_cast<int>(std::lround(ltc::samples_per_bit(sample_rate, rate)));
}

/// Streams a WAV file through the LTC decoder.
inline ltc::ExtractResult decode_file(const std::string& path, FrameRate rate, int halfwidth) {
  wav::Reader reader(path);
  ltc::Decoder decoder(rate, bmc::DemodOptions{nominal_bit_period(reader.sample_rate(), rate), halfwidth});
  std::vector<ltc::DecodedFrame> frames;
  std::vector<float> buf(1 << 16);
  while (const std::size_t n = reader.read(buf)) decoder.push(std::span<const float>(buf.data(), n), frames);
  decoder.finish(frames);
  if (decoder.bits_demodulated() == 0) {
    throw Error(ErrorCode::NoCarrierDetected, path + ": no biphase-mark transitions found");
  }
  ltc::ExtractResult r;
  for (const auto& f : frames) r.frames.push_back({f.frame.timecode, f.anchor_sample});
  r.decode_failures = decoder.decode_failures();
  r.lock_losses = decoder.lock_losses();
  return r;
}

inline void write_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  auto f = csv::open_out(path);
  f << j.dump(2) << '\n';
}

inline std::string verdict_line(const std::vector<analysis::Verdict>& v) {
  std::string s;
  for (const auto& x : v) {
    s += (s.empty() ? "" : ", ") + fixed(x.threshold * 1e3, 0) + " ms " + (x.pass ? "PASS" : "FAIL");
  }
  return s;
}

}  // namespace detail

struct Options {
  bool strict = false;
};

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using detail::fixed;
  CLI::App app{"LTC and event-based synchronization toolkit for multimodal recordings", "ltcsync"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_flag("--strict", opt.strict, "Exit with status 2 when any tolerance verdict fails");

  // Set by the chosen subcommand's callback; tolerance failures count only under --strict.
  int status = 0;
  bool verdict_failed = false;

  // ---- ltc encode / decode ----------------------------------------------
  auto* ltc_cmd = app.add_subcommand("ltc", "Linear timecode audio");
  ltc_cmd->require_subcommand(1);

  struct {
    std::string start = "00:00:00:00";
    double duration = 1.0;
    long long frames = -1;
    int fps = 30;
    std::int64_t sample_rate = 192000;
    float amplitude = 0.5f;
    std::string format = "pcm16";
    std::string out;
  } enc;
  auto* encode = ltc_cmd->add_subcommand("encode", "Write BMC-modulated LTC to a WAV file");
  encode->add_option("--start", enc.start, "Start timecode HH:MM:SS:FF");
  encode->add_option("--duration", enc.duration, "Length in seconds (rounded to whole frames)");
  encode->add_option("--frames", enc.frames, "Frame count; overrides --duration when >= 0");
  encode->add_option("--fps", enc.fps, "Frame rate (24, 25 or 30)");
  encode->add_option("--sample-rate", enc.sample_rate, "Sample rate, Hz");
  encode->add_option("--amplitude", enc.amplitude, "Peak level, full scale = 1");
  encode->add_option("--format", enc.format, "WAV sample format: pcm16 or float32");
  encode->add_option("-o,--out", enc.out, "Output WAV path")->required();
  encode->callback([&] {
    const FrameRate rate = frame_rate_from_int(enc.fps);
    const Timecode start = parse_timecode(enc.start, rate);
    if (!(enc.amplitude > 0.0f && enc.amplitude <= 1.0f)) throw Error(ErrorCode::InvalidArgument, "amplitude must be in (0, 1]");
    long long frames = enc.frames;
    if (frames < 0) {
      if (!(enc.duration >= 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be non-negative");
      frames = std::llround(enc.duration * enc.fps);
    }
    ltc::Encoder encoder(start, enc.sample_rate, enc.amplitude);
    wav::Writer writer(enc.out, enc.sample_rate, detail::parse_format(enc.format));
    std::vector<float> buf;
    std::uint64_t samples = 0;
    for (long long i = 0; i < frames; ++i) {
      encoder.append_frame(buf);
      if (buf.size() >= (1u << 16) || i + 1 == frames) {
        writer.write(buf);
        samples += buf.size();
        buf.clear();
      }
    }
    writer.close();
    out << "wrote " << frames << " frames (" << samples << " samples) from " << to_string(start) << " to " << enc.out
        << '\n';
  });

  struct {
    std::string in;
    int fps = 30;
    std::string out;
    int halfwidth = 0;
  } dec;
  auto* decode = ltc_cmd->add_subcommand("decode", "Decode LTC from a WAV file");
  decode->add_option("-i,--in", dec.in, "Input WAV path")->required();
  decode->add_option("--fps", dec.fps, "Frame rate (24, 25 or 30)");
  decode->add_option("-o,--out", dec.out, "CSV of anchor_sample,timecode; '-' for stdout");
  decode->add_option("--search-halfwidth", dec.halfwidth, "Bit-edge search window, samples; 0 = automatic");
  decode->callback([&] {
    const auto r = detail::decode_file(dec.in, frame_rate_from_int(dec.fps), dec.halfwidth);
    if (dec.out == "-") {
      csv::write_anchors(out, r.frames);
    } else if (!dec.out.empty()) {
      auto f = csv::open_out(dec.out);
      csv::write_anchors(f, r.frames);
    }
    out << "decoded " << r.frames.size() << " frames, " << r.decode_failures << " decode failures, " << r.lock_losses
        << " lock losses";
    if (!r.frames.empty()) out << ", " << to_string(r.frames.front().timecode) << " .. " << to_string(r.frames.back().timecode);
    out << '\n';
  });

  // ---- lag ----------------------------------------------------------------
  struct {
    std::string a, b;
    std::int64_t max_lag = 6400;
    bool normalized = false;
    int fps = 30;
    bool skip_frames = false;
  } lag;
  auto* lag_cmd = app.add_subcommand("lag", "Sub-frame lag between two recordings by cross-correlation");
  lag_cmd->add_option("a", lag.a, "Reference WAV")->required();
  lag_cmd->add_option("b", lag.b, "Second WAV; a positive lag means b leads a")->required();
  lag_cmd->add_option("--max-lag", lag.max_lag, "Search range, samples (one 30 fps frame at 192 kHz)");
  lag_cmd->add_flag("--normalized", lag.normalized, "Energy-normalised correlation");
  lag_cmd->add_option("--fps", lag.fps, "LTC frame rate for the frame-level check");
  lag_cmd->add_flag("--no-frame-check", lag.skip_frames, "Skip decoding timecode from both files");
  lag_cmd->callback([&] {
    const auto a = wav::read_file(lag.a);
    const auto b = wav::read_file(lag.b);
    const auto m = xcorr::crosscorr_lag(a, b, lag.max_lag,
                                        lag.normalized ? xcorr::Normalization::Energy : xcorr::Normalization::None);
    out << "lag: " << m.lag_samples << " samples (" << fixed(m.lag_seconds * 1e6, 1) << " µs)\n";
    if (lag.skip_frames) return;
    const FrameRate rate = frame_rate_from_int(lag.fps);
    const int halfwidth = 0;
    try {
      const auto ta = ltc::extract_timecodes(a, detail::nominal_bit_period(a.sample_rate, rate), rate, halfwidth);
      const auto tb = ltc::extract_timecodes(b, detail::nominal_bit_period(b.sample_rate, rate), rate, halfwidth);
      const auto r = analysis::frame_level_sync_check(ta.frames, tb.frames);
      out << "frame-level: " << (r.synchronized() ? "synchronized" : "NOT synchronized") << " (" << r.compared
          << " frames compared, " << r.mismatches << " mismatches";
      if (r.first_mismatch) out << ", first at frame " << r.pairs[*r.first_mismatch].index_a;
      out << ")\n";
    } catch (const Error& e) {
      out << "frame-level: not checked (" << e.what() << ")\n";
    }
  });

  struct {
    std::string pairs;
    std::int64_t max_lag = 6400;
    bool normalized = false;
    std::string json;
  } batch;
  auto* batch_cmd = app.add_subcommand("lag-batch", "Lags for many recording pairs, with mean and median");
  batch_cmd->add_option("pairs", batch.pairs, "CSV with header wav_a,wav_b")->required();
  batch_cmd->add_option("--max-lag", batch.max_lag, "Search range, samples");
  batch_cmd->add_flag("--normalized", batch.normalized, "Energy-normalised correlation");
  batch_cmd->add_option("--json", batch.json, "Also write a JSON report here");

  struct {
    std::vector<std::int64_t> lags;
    std::int64_t sample_rate = 192000;
    std::string json;
  } stats;
  auto* stats_cmd = app.add_subcommand("lag-stats", "Mean and median of a list of lags");
  stats_cmd->add_option("lags", stats.lags, "Lags in samples")->required()->delimiter(',')->allow_extra_args();
  stats_cmd->add_option("--sample-rate", stats.sample_rate, "Sample rate, Hz");
  stats_cmd->add_option("--json", stats.json, "Also write a JSON report here");

  const auto report_lags = [&](const std::vector<std::int64_t>& lags, std::int64_t sr, const std::string& json_path,
                               nlohmann::json j) {
    const auto s = analysis::summarize_lags(lags, sr);
    out << "sessions: " << s.count << '\n';
    out << "mean: " << csv::format_number(s.mean_samples) << " samples (" << fixed(s.mean_seconds * 1e6, 2) << " µs)\n";
    out << "median: " << csv::format_number(s.median_samples) << " samples (" << fixed(s.median_seconds * 1e6, 2)
        << " µs)\n";
    if (!json_path.empty()) {
      j["sample_rate"] = sr;
      j["lags_samples"] = lags;
      j["mean_samples"] = s.mean_samples;
      j["median_samples"] = s.median_samples;
      j["mean_seconds"] = s.mean_seconds;
      j["median_seconds"] = s.median_seconds;
      detail::write_json(j, json_path, out);
    }
  };
  stats_cmd->callback([&] { report_lags(stats.lags, stats.sample_rate, stats.json, nlohmann::json::object()); });
  batch_cmd->callback([&] {
    const auto pairs = csv::read_lag_pairs(batch.pairs);
    if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, batch.pairs + ": no pairs");
    const auto base = std::filesystem::path(batch.pairs).parent_path();
    const auto resolve = [&](const std::string& p) {
      const std::filesystem::path q(p);
      return (q.is_absolute() ? q : base / q).string();
    };
    std::vector<std::int64_t> lags;
    std::int64_t sr = 0;
    nlohmann::json j;
    for (const auto& [pa, pb] : pairs) {
      const auto a = wav::read_file(resolve(pa));
      const auto b = wav::read_file(resolve(pb));
      if (sr != 0 && a.sample_rate != sr) throw Error(ErrorCode::SampleRateMismatch, "pairs use different sample rates");
      sr = a.sample_rate;
      const auto m = xcorr::crosscorr_lag(a, b, batch.max_lag,
                                          batch.normalized ? xcorr::Normalization::Energy : xcorr::Normalization::None);
      out << pa << " vs " << pb << ": " << m.lag_samples << " samples (" << fixed(m.lag_seconds * 1e6, 1) << " µs)\n";
      lags.push_back(m.lag_samples);
      j["pairs"].push_back({{"wav_a", pa}, {"wav_b", pb}, {"lag_samples", m.lag_samples}});
    }
    report_lags(lags, sr, batch.json, j);
  });

  // ---- events -------------------------------------------------------------
  auto* ev = app.add_subcommand("events", "Stimulus schedules, beep tracks and event alignment");
  ev->require_subcommand(1);

  struct {
    int n = 10;
    std::uint64_t seed = 42;
    events::ScheduleParams p;
    std::string out = "-";
  } gen;
  auto* gen_cmd = ev->add_subcommand("generate", "Random event schedule (truncated Poisson gaps)");
  gen_cmd->add_option("-n,--count", gen.n, "Number of events");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--poisson-mean", gen.p.poisson_mean, "Mean of the Poisson gap distribution, seconds");
  gen_cmd->add_option("--min-gap", gen.p.min_gap, "Shortest gap, whole seconds");
  gen_cmd->add_option("--max-gap", gen.p.max_gap, "Longest gap, whole seconds");
  gen_cmd->add_option("--lead-in", gen.p.lead_in, "First onset, seconds");
  gen_cmd->add_option("-o,--out", gen.out, "Schedule CSV; '-' for stdout");
  gen_cmd->callback([&] {
    const auto s = events::generate_schedule(gen.n, gen.seed, gen.p);
    if (gen.out == "-") {
      csv::write_schedule(out, s);
    } else {
      auto f = csv::open_out(gen.out);
      csv::write_schedule(f, s);
      out << "wrote " << s.onsets.size() << " onsets to " << gen.out << '\n';
    }
  });

  struct {
    std::string schedule;
    std::int64_t sample_rate = 48000;
    double beep_duration = 0.2;
    events::BeepParams beep;
    std::string format = "pcm16";
    std::string out;
  } ren;
  auto* ren_cmd = ev->add_subcommand("render", "Render a schedule as a beep track");
  ren_cmd->add_option("schedule", ren.schedule, "Schedule CSV")->required();
  ren_cmd->add_option("--sample-rate", ren.sample_rate, "Sample rate, Hz");
  ren_cmd->add_option("--beep-duration", ren.beep_duration, "Burst length, seconds");
  ren_cmd->add_option("--frequency", ren.beep.frequency, "Tone frequency, Hz");
  ren_cmd->add_option("--amplitude", ren.beep.amplitude, "Tone peak level");
  ren_cmd->add_option("--fade", ren.beep.fade, "Linear fade at each burst end, seconds");
  ren_cmd->add_option("--tail", ren.beep.tail, "Silence after the last burst, seconds");
  ren_cmd->add_option("--format", ren.format, "WAV sample format: pcm16 or float32");
  ren_cmd->add_option("-o,--out", ren.out, "Output WAV path")->required();
  ren_cmd->callback([&] {
    const auto s = csv::read_schedule(ren.schedule, ren.beep_duration);
    const auto sig = events::render_beep_track(s, ren.sample_rate, ren.beep);
    wav::write_file(ren.out, sig, detail::parse_format(ren.format));
    out << "wrote " << sig.samples.size() << " samples at " << ren.sample_rate << " Hz to " << ren.out << '\n';
  });

  struct {
    std::string in;
    events::DetectParams p;
    std::string out = "-";
  } det;
  auto* det_cmd = ev->add_subcommand("detect", "Amplitude-threshold event boundaries in a WAV file");
  det_cmd->add_option("-i,--in", det.in, "Input WAV")->required();
  det_cmd->add_option("--threshold", det.p.threshold, "Absolute level, fraction of full scale");
  det_cmd->add_option("--min-gap", det.p.min_gap, "Silence that separates two events, seconds");
  det_cmd->add_option("--hold", det.p.hold, "Dips shorter than this never end an event, seconds");
  det_cmd->add_option("-o,--out", det.out, "Boundaries CSV; '-' for stdout");
  det_cmd->callback([&] {
    const auto b = events::detect_event_boundaries(wav::read_file(det.in), det.p);
    if (det.out == "-") {
      csv::write_boundaries(out, b);
    } else {
      auto f = csv::open_out(det.out);
      csv::write_boundaries(f, b);
      out << "detected " << b.events.size() << " events, wrote " << det.out << '\n';
    }
  });

  struct {
    std::string a, b;
    std::string schedule, ground_truth;
    double beep_duration = 0.2;
    std::string json = "-";
    std::string per_event;
  } al;
  auto* al_cmd = ev->add_subcommand("align", "Compare two streams' inter-event durations to ground truth");
  al_cmd->add_option("a", al.a, "Stream A: boundaries or durations CSV")->required();
  al_cmd->add_option("b", al.b, "Stream B: boundaries or durations CSV")->required();
  auto* gt_sched = al_cmd->add_option("--schedule", al.schedule, "Ground truth from a schedule CSV");
  auto* gt_dur = al_cmd->add_option("--ground-truth", al.ground_truth, "Ground truth durations CSV");
  gt_sched->excludes(gt_dur);
  al_cmd->add_option("--beep-duration", al.beep_duration, "Burst length used with --schedule, seconds");
  al_cmd->add_option("--json", al.json, "AlignmentReport JSON; '-' for stdout");
  al_cmd->add_option("--per-event", al.per_event, "Per-event CSV of durations and errors");
  al_cmd->callback([&] {
    std::vector<double> gt;
    if (!al.schedule.empty()) {
      gt = analysis::ground_truth_durations(csv::read_schedule(al.schedule, al.beep_duration));
    } else if (!al.ground_truth.empty()) {
      gt = csv::read_durations(al.ground_truth);
    } else {
      throw Error(ErrorCode::InvalidArgument, "give --schedule or --ground-truth");
    }
    const auto da = csv::read_durations(al.a);
    const auto db = csv::read_durations(al.b);
    const auto r = analysis::crossmodal_offset_report(da, db, gt);
    detail::write_json(analysis::to_json(r), al.json, out);
    if (!al.per_event.empty()) {
      auto f = csv::open_out(al.per_event);
      f << "index,ground_truth_seconds,duration_a_seconds,duration_b_seconds,abs_error_a_seconds,abs_error_b_seconds\n";
      for (std::size_t i = 0; i < gt.size(); ++i) {
        f << i << ',' << csv::format_number(gt[i]) << ',' << csv::format_number(da[i]) << ',' << csv::format_number(db[i])
          << ',' << csv::format_number(r.a.abs_errors[i]) << ',' << csv::format_number(r.b.abs_errors[i]) << '\n';
      }
    }
    if (al.json != "-") {
      out << "conservative bound " << fixed(r.conservative_bound * 1e3, 1) << " ms: " << detail::verdict_line(r.verdicts)
          << '\n';
    }
    verdict_failed = !r.all_pass();
  });

  // ---- simulate -----------------------------------------------------------
  struct {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    bool print_config = false;
  } sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the acquisition network and measure timestamp error");
  sim_cmd->add_option("-c,--config", sim.config, "JSON config; missing keys keep their defaults");
  sim_cmd->add_option("-o,--out-dir", sim.out_dir, "Directory for trace.csv and latency.json");
  sim_cmd->add_option("--seed", sim.seed, "Override the config seed");
  sim_cmd->add_option("--duration", sim.duration, "Override the simulated duration, seconds");
  sim_cmd->add_flag("--print-config", sim.print_config, "Print the effective config as JSON and exit");
  sim_cmd->callback([&] {
    sim::TopologyConfig cfg = sim.config.empty() ? sim::TopologyConfig{} : sim::load_config(sim.config);
    if (sim.seed) cfg.seed = *sim.seed;
    if (sim.duration) cfg.duration = *sim.duration;
    sim::validate(cfg);
    if (sim.print_config) {
      out << sim::to_json(cfg).dump(2) << '\n';
      return;
    }
    if (sim.out_dir.empty()) throw Error(ErrorCode::InvalidArgument, "--out-dir is required");
    const auto trace = sim::run_simulation(cfg);
    const auto lat = sim::measure_sim_latency(trace);
    std::filesystem::create_directories(sim.out_dir);
    const auto dir = std::filesystem::path(sim.out_dir);
    sim::write_trace_csv(trace, (dir / "trace.csv").string());
    auto j = sim::to_json(lat);
    j["config"] = sim::to_json(cfg);
    detail::write_json(j, (dir / "latency.json").string(), out);
    out << "devices: " << trace.devices.size() << ", packets: " << trace.packets.size() << '\n';
    out << "wearable mean |offset| " << fixed(lat.wearables.mean_abs * 1e3, 2) << " ms, camera mean |offset| "
        << fixed(lat.cameras.mean_abs * 1e3, 2) << " ms\n";
    out << "max crossmodal offset " << fixed(lat.crossmodal.max_abs * 1e3, 1) << " ms: "
        << (lat.verdicts.front().pass ? "PASS" : "FAIL") << " (" << detail::verdict_line(lat.verdicts) << ")\n";
    verdict_failed = !lat.verdicts.front().pass;
  });

  // ---- classify -------------------------------------------------------------
  struct {
    std::string in;
    analysis::DesyncThresholds th;
  } cls;
  auto* cls_cmd = app.add_subcommand("classify", "Fit offset = a + b t and name the desynchronization type");
  cls_cmd->add_option("-i,--in", cls.in, "CSV with header t_seconds,offset_seconds")->required();
  cls_cmd->add_option("--drift-threshold-ppm", cls.th.drift_ppm, "Slope above which a series is drifting, ppm");
  cls_cmd->add_option("--offset-threshold", cls.th.offset_seconds, "Intercept above which a series is offset, seconds");
  cls_cmd->callback([&] { out << analysis::to_json(analysis::classify_desync(csv::read_offsets(cls.in), cls.th)).dump(2) << '\n'; });

  // ---- timecode -------------------------------------------------------------
  struct {
    std::optional<std::int64_t> unix_ns;
    std::optional<std::int64_t> sample;
    std::int64_t sample_rate = 192000;
    std::string start = "00:00:00.000";
    int fps = 30;
  } tcc;
  auto* tc_cmd = app.add_subcommand("timecode", "Convert UNIX time or a sample index to timecode");
  auto* o_unix = tc_cmd->add_option("--unix-ns", tcc.unix_ns, "UNIX time, nanoseconds");
  auto* o_sample = tc_cmd->add_option("--sample", tcc.sample, "Sample index of a recording");
  o_unix->excludes(o_sample);
  tc_cmd->add_option("--sample-rate", tcc.sample_rate, "Sample rate for --sample, Hz");
  tc_cmd->add_option("--start", tcc.start, "Wall clock of sample 0, HH:MM:SS.mmm");
  tc_cmd->add_option("--fps", tcc.fps, "Frame rate (24, 25 or 30)");
  tc_cmd->callback([&] {
    const FrameRate rate = frame_rate_from_int(tcc.fps);
    if (tcc.unix_ns) {
      const auto w = unix_to_wallclock(UnixInstant{*tcc.unix_ns});
      out << to_string(w) << ' ' << to_string(wallclock_to_timecode(w, rate)) << '\n';
    } else if (tcc.sample) {
      out << to_string(sample_to_timecode(*tcc.sample, tcc.sample_rate, parse_wallclock(tcc.start), rate)) << '\n';
    } else {
      throw Error(ErrorCode::InvalidArgument, "give --unix-ns or --sample");
    }
  });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (verdict_failed && opt.strict) status = 2;
  return status;
}

}  // namespace ltcsync::cli
