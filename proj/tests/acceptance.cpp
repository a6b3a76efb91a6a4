// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "ltcsync/ltcsync.hpp"
#include "test_support.hpp"

using namespace ltcsync;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. 30 minutes of 30 fps LTC at 192 kHz, streamed through encoder and decoder.
Outcome ltc_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t frames = 54000;
  const Timecode start{10, 0, 0, 0, FrameRate::Fps30};
  ltc::Encoder enc(start, 192000);
  ltc::Decoder dec(FrameRate::Fps30, bmc::DemodOptions{80, 3});
  std::vector<float> buf;
  std::vector<ltc::DecodedFrame> out;
  std::size_t checked = 0, errors = 0;
  Timecode expect = start;
  std::int64_t samples = 0;
  const auto drain = [&] {
    for (const auto& f : out) {
      if (f.frame.timecode != expect || f.anchor_sample != 6400 * static_cast<std::int64_t>(checked)) ++errors;
      expect = timecode_increment(f.frame.timecode);
      ++checked;
    }
    out.clear();
  };
  for (std::size_t i = 0; i < frames; ++i) {
    enc.append_frame(buf);
    if (buf.size() >= 300 * 6400 || i + 1 == frames) {
      samples += static_cast<std::int64_t>(buf.size());
      dec.push(buf, out);
      buf.clear();
      drain();
    }
  }
  dec.finish(out);
  drain();
  const double secs = seconds_since(t0);
  const bool pass = checked == frames && errors == 0 && dec.decode_failures() == 0 && samples == 345'600'000;
  return {pass, std::to_string(checked) + "/" + std::to_string(frames) + " frames, " + std::to_string(errors) +
                    " sequence errors, " + std::to_string(dec.decode_failures()) + " decode failures, " +
                    fmt("%.1f s", secs)};
}

// 2. Bit periods uniform in [77, 83] samples plus 20 dB SNR white noise.
Outcome jitter_robustness() {
  const std::size_t frames = 5400;
  std::mt19937_64 rng(2024);
  Timecode tc{13, 59, 0, 0, FrameRate::Fps30};
  std::vector<Timecode> expected;
  std::vector<std::uint8_t> bits;
  bits.reserve(frames * ltc::kFrameBits);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto v = ltc::to_bit_vector(ltc::encode_frame(tc));
    bits.insert(bits.end(), v.begin(), v.end());
    expected.push_back(tc);
    tc = timecode_increment(tc);
  }
  const auto periods = gen::jittered_periods(rng, bits.size(), 80, 3);
  auto sig = bmc::modulate_bits(bits, periods, 192000, 0.5f);
  gen::add_noise(sig.samples, 20.0, 99);
  const auto r = ltc::extract_timecodes(sig, 80, FrameRate::Fps30);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < std::min(r.frames.size(), expected.size()); ++i) wrong += r.frames[i].timecode != expected[i];
  const bool pass = r.frames.size() == frames && wrong == 0 && r.decode_failures == 0;
  return {pass, std::to_string(r.frames.size()) + "/" + std::to_string(frames) + " frames, " + std::to_string(wrong) +
                    " wrong, " + std::to_string(r.decode_failures) + " decode failures, " +
                    std::to_string(r.lock_losses) + " lock losses"};
}

// 3. Lag recovery on random signals, antisymmetry, and a naive-correlation oracle.
std::vector<float> random_signal(std::mt19937_64& rng, std::size_t n) {
  std::vector<float> x(n);
  std::normal_distribution<double> g(0.0, 0.3);
  switch (rng() % 3) {
    case 0:
      for (auto& v : x) v = static_cast<float>(g(rng));
      break;
    case 1: {  // AR(1) coloured noise
      double s = 0.0;
      for (auto& v : x) v = static_cast<float>(s = 0.9 * s + g(rng));
      break;
    }
    default: {  // LTC from a random start, cut at a random phase, light noise
      const Timecode start = gen::random_timecode(rng, FrameRate::Fps30);
      const std::size_t cut = rng() % 6400;
      const auto ltc = ltc::generate_ltc(start, (n + cut) / 6400 + 1, 192000);
      for (std::size_t i = 0; i < n; ++i) x[i] = ltc.samples[i + cut] + static_cast<float>(0.01 * g(rng));
      break;
    }
  }
  return x;
}

std::vector<float> shift(const std::vector<float>& x, std::int64_t s) {
  std::vector<float> b(x.size(), 0.0f);
  for (std::int64_t n = 0; n < static_cast<std::int64_t>(x.size()); ++n) {
    const std::int64_t k = n + s;
    if (k >= 0 && k < static_cast<std::int64_t>(x.size())) b[static_cast<std::size_t>(n)] = x[static_cast<std::size_t>(k)];
  }
  return b;
}

std::int64_t naive_lag(const std::vector<float>& a, const std::vector<float>& b, std::int64_t max_lag) {
  std::int64_t best_lag = 0;
  double best = -HUGE_VAL;
  const auto na = static_cast<std::int64_t>(a.size()), nb = static_cast<std::int64_t>(b.size());
  for (std::int64_t lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::int64_t n = std::max<std::int64_t>(0, lag); n < std::min(na, nb + lag); ++n) {
      s += static_cast<double>(a[static_cast<std::size_t>(n)]) * static_cast<double>(b[static_cast<std::size_t>(n - lag)]);
    }
    if (s > best || (s == best && (std::llabs(lag) < std::llabs(best_lag) ||
                                   (std::llabs(lag) == std::llabs(best_lag) && lag < best_lag)))) {
      best = s;
      best_lag = lag;
    }
  }
  return best_lag;
}

Outcome lag_exactness() {
  std::mt19937_64 rng(7);
  const std::int64_t max_lag = 6400;
  int recovered = 0, antisymmetric = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 12800 + rng() % 27200;
    const auto x = random_signal(rng, n);
    const std::int64_t s = static_cast<std::int64_t>(rng() % 6401) - 3200;
    const auto y = shift(x, s);
    const auto ab = xcorr::crosscorr_lag(x, y, 192000, max_lag).lag_samples;
    const auto ba = xcorr::crosscorr_lag(y, x, 192000, max_lag).lag_samples;
    recovered += ab == s;
    antisymmetric += ba == -ab;
  }
  // Oracle: independent (not shifted copies) pairs, up to 1e5 samples.
  int oracle_ok = 0, oracle_n = 0;
  const auto check = [&](std::size_t n, std::int64_t ml) {
    const auto a = random_signal(rng, n);
    auto b = shift(a, static_cast<std::int64_t>(rng() % 2001) - 1000);
    std::normal_distribution<double> g(0.0, 0.3);
    for (auto& v : b) v += static_cast<float>(g(rng));
    ++oracle_n;
    oracle_ok += xcorr::crosscorr_lag(a, b, 192000, ml).lag_samples == naive_lag(a, b, ml);
  };
  for (int i = 0; i < 8; ++i) check(12800 + rng() % 3200, max_lag);
  check(100000, 400);
  check(100000, 400);
  const bool pass = recovered == trials && antisymmetric == trials && oracle_ok == oracle_n;
  return {pass, std::to_string(recovered) + "/" + std::to_string(trials) + " shifts recovered, " +
                    std::to_string(antisymmetric) + "/" + std::to_string(trials) + " antisymmetric, oracle " +
                    std::to_string(oracle_ok) + "/" + std::to_string(oracle_n)};
}

// 4. The six session lags.
Outcome session_statistics() {
  const std::vector<std::int64_t> lags = {79, 80, 80, 80, -43, 78};
  const auto s = analysis::summarize_lags(lags, 192000);
  const double tol_us = 0.01;
  const bool mean_ok = s.mean_samples == 59.0 && std::fabs(s.mean_seconds * 1e6 - 307.29) <= tol_us;
  const bool median_ok = s.median_samples == 79.5 && std::fabs(s.median_seconds * 1e6 - 414.0) <= tol_us;
  return {mean_ok && median_ok,
          "mean " + csv::format_number(s.mean_samples) + " samples = " + fmt("%.4f", s.mean_seconds * 1e6) +
              " us (expected 307.29, " + (mean_ok ? "ok" : "off") + "), median " + csv::format_number(s.median_samples) +
              " samples = " + fmt("%.4f", s.median_seconds * 1e6) + " us (expected 414, " + (median_ok ? "ok" : "off") +
              ")"};
}

// 5. Schedule -> render -> detect -> align, clean and with injected offsets.
Outcome event_pipeline() {
  const auto sched = events::generate_schedule(10, 42);
  const auto gt = analysis::ground_truth_durations(sched);
  const auto durations = [&](std::int64_t sr) {
    return analysis::interevent_durations(events::detect_event_boundaries(events::render_beep_track(sched, sr)));
  };
  const auto d48 = durations(48000);
  const auto d20 = durations(20000);
  const auto clean = analysis::crossmodal_offset_report(d48, d20, gt);
  auto a = d48, b = d20;
  for (double& v : a) v += 0.0108;
  for (double& v : b) v += 0.0019;
  const auto noisy = analysis::crossmodal_offset_report(a, b, gt);
  const bool pass = clean.a.mean <= 1e-3 && clean.b.mean <= 1e-3 && std::fabs(noisy.conservative_bound - 0.0127) <= 1e-4 &&
                    noisy.verdicts[0].pass;
  return {pass, "clean means " + fmt("%.4f", clean.a.mean * 1e3) + " / " + fmt("%.4f", clean.b.mean * 1e3) +
                    " ms, injected bound " + fmt("%.4f", noisy.conservative_bound * 1e3) + " ms, 40 ms verdict " +
                    (noisy.verdicts[0].pass ? "PASS" : "FAIL")};
}

// 6. Default network over 9.5 simulated hours, 20 seeds.
bool cameras_follow_master(const sim::SimTrace& tr) {
  std::vector<sim::ClockState> state(tr.devices.size());
  std::size_t li = 0;
  for (const auto& p : tr.packets) {
    while (li < tr.sync_log.size() && tr.sync_log[li].true_time <= p.true_time) {
      state[static_cast<std::size_t>(tr.sync_log[li].device)] = tr.sync_log[li].state;
      ++li;
    }
    const auto& d = tr.devices[static_cast<std::size_t>(p.device)];
    if (d.role != sim::Role::Camera) continue;
    if (p.device_timestamp != sim::local_time(state[static_cast<std::size_t>(d.parent)], p.true_time)) return false;
  }
  return true;
}

Outcome simulator_band() {
  int ok = 0;
  double lo = HUGE_VAL, hi = 0.0, worst_cross = 0.0, slowest = 0.0;
  const int runs = 20;
  for (int seed = 1; seed <= runs; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    sim::TopologyConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto tr = sim::run_simulation(cfg);
    const auto lat = sim::measure_sim_latency(tr);
    slowest = std::max(slowest, seconds_since(t0));
    const double m = lat.wearables.mean_abs;
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    worst_cross = std::max(worst_cross, lat.crossmodal.max_abs);
    ok += m >= 0.002 && m <= 0.008 && lat.crossmodal.max_abs < 0.040 && cameras_follow_master(tr) && slowest < 60.0;
  }
  return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " runs in band, wearable mean |offset| " +
                          fmt("%.2f", lo * 1e3) + ".." + fmt("%.2f", hi * 1e3) + " ms, worst crossmodal " +
                          fmt("%.2f", worst_cross * 1e3) + " ms, slowest run " + fmt("%.1f s", slowest)};
}

// 7. Constant offsets and drift rates recovered from simulator traces.
std::vector<analysis::OffsetSample> wearable_series(const sim::SimTrace& tr, double from, double to) {
  std::vector<analysis::OffsetSample> s;
  const int w = tr.devices_with_role(sim::Role::Wearable).front();
  for (const auto& p : tr.packets_of(w)) {
    if (p.true_time >= from && p.true_time < to) s.push_back({p.true_time, p.device_timestamp - p.true_time});
  }
  return s;
}

Outcome desync_diagnosis() {
  sim::TopologyConfig base;
  base.wearables = 1;
  base.cameras = 0;
  base.base_stations = 0;
  base.ntp_residual = {0.0, 0.0, 0.0};
  base.duration = 3600.0;

  double worst_offset_err = 0.0, worst_slope = 0.0, worst_drift_err = 0.0;
  bool kinds_ok = true;
  for (double off : {-0.030, -0.004, 0.0025, 0.025, 0.200}) {
    auto c = base;
    c.drift_ppm = {0.0, 0.0};
    c.handshake_jitter = {off, off};
    const auto d = analysis::classify_desync(wearable_series(sim::run_simulation(c), 0.0, c.duration));
    worst_offset_err = std::max(worst_offset_err, std::fabs(d.constant_offset - off) / std::fabs(off));
    worst_slope = std::max(worst_slope, std::fabs(d.drift_ppm));
    kinds_ok = kinds_ok && d.kind == analysis::DesyncKind::ConstantOffset;
  }
  for (double ppm : {-20.0, -7.5, 3.0, 12.0, 20.0}) {
    auto c = base;
    c.drift_ppm = {ppm, ppm};
    c.handshake_jitter = {0.0, 0.0};
    c.wearable_sync_interval = 600.0;
    const auto tr = sim::run_simulation(c);
    for (double from : {0.0, 1200.0, 3000.0}) {
      const auto d = analysis::classify_desync(wearable_series(tr, from, from + 600.0));
      worst_drift_err = std::max(worst_drift_err, std::fabs(d.drift_ppm - ppm) / std::fabs(ppm));
      kinds_ok = kinds_ok && d.kind == analysis::DesyncKind::Drifting;
    }
  }
  const bool pass = worst_offset_err <= 0.01 && worst_slope < 0.1 && worst_drift_err <= 0.05 && kinds_ok;
  return {pass, "offset error " + fmt("%.2e", worst_offset_err * 100) + " %, constant-offset |slope| " +
                    fmt("%.2e", worst_slope) + " ppm, drift error " + fmt("%.2e", worst_drift_err * 100) + " %"};
}

// 8. Same arguments and seed give identical outputs.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

std::string snapshot(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string s;
  for (const auto& f : files) s += std::filesystem::relative(f, dir).string() + "\n" + slurp(f) + "\n";
  return s;
}

std::string run_all_commands(const std::filesystem::path& dir, bool& all_ok) {
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };
  std::ostringstream log;
  const std::vector<std::vector<std::string>> commands = {
      {"ltc", "encode", "--start", "01:02:03:04", "--duration", "5", "--out", p("a.wav")},
      {"ltc", "encode", "--start", "01:02:03:04", "--duration", "5", "--format", "float32", "--out", p("b.wav")},
      {"ltc", "decode", "--in", p("a.wav"), "--out", p("a.csv")},
      {"lag", p("a.wav"), p("b.wav")},
      {"lag-stats", "79,80,80,80,-43,78", "--json", p("stats.json")},
      {"events", "generate", "-n", "10", "--seed", "42", "--out", p("sched.csv")},
      {"events", "render", p("sched.csv"), "--sample-rate", "48000", "--out", p("e48.wav")},
      {"events", "render", p("sched.csv"), "--sample-rate", "20000", "--out", p("e20.wav")},
      {"events", "detect", "--in", p("e48.wav"), "--out", p("e48.csv")},
      {"events", "detect", "--in", p("e20.wav"), "--out", p("e20.csv")},
      {"events", "align", p("e48.csv"), p("e20.csv"), "--schedule", p("sched.csv"), "--json", p("align.json"),
       "--per-event", p("align.csv")},
      {"simulate", "--seed", "5", "--duration", "7200", "--out-dir", p("sim")},
      {"timecode", "--unix-ns", "1700000000123456789"},
  };
  for (const auto& args : commands) {
    std::ostringstream out, err;
    const int status = cli::run(args, out, err);
    all_ok = all_ok && status == 0;
    log << status << '\n' << out.str() << err.str();
  }
  {
    std::ofstream f(p("offsets.csv"));
    f << "t_seconds,offset_seconds\n";
    for (int i = 0; i < 50; ++i) f << i << ',' << 1e-3 + i * 2e-6 << '\n';
  }
  std::ostringstream out, err;
  const int status = cli::run({"classify", "--in", p("offsets.csv")}, out, err);
  all_ok = all_ok && status == 0;
  log << status << '\n' << out.str() << err.str();
  // Paths differ between the two runs; compare them with the directory name removed.
  std::string text = log.str() + snapshot(dir);
  for (std::size_t pos; (pos = text.find(dir.string())) != std::string::npos;) text.replace(pos, dir.string().size(), "<dir>");
  return text;
}

Outcome determinism() {
  const auto tmp = std::filesystem::temp_directory_path();
  bool all_ok = true;
  const auto a = run_all_commands(tmp / "ltcsync_accept_run1", all_ok);
  const auto b = run_all_commands(tmp / "ltcsync_accept_run2", all_ok);
  const bool cli_same = a == b && all_ok;

  sim::TopologyConfig cfg;
  cfg.seed = 11;
  const auto t1 = sim::run_simulation(cfg);
  const auto t2 = sim::run_simulation(cfg);
  const bool sim_same = t1.packets == t2.packets && t1.sync_log == t2.sync_log;
  std::filesystem::remove_all(tmp / "ltcsync_accept_run1");
  std::filesystem::remove_all(tmp / "ltcsync_accept_run2");
  return {cli_same && sim_same, std::string("CLI outputs ") + (cli_same ? "identical" : "DIFFER") + " (" +
                                    std::to_string(a.size()) + " bytes compared), 9.5 h simulation " +
                                    (sim_same ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"LTC round trip, 54000 frames at 192 kHz", ltc_round_trip},
      {"decode under [77,83] bit jitter and 20 dB noise", jitter_robustness},
      {"lag estimator exactness and oracle equivalence", lag_exactness},
      {"session lag statistics", session_statistics},
      {"event pipeline closed loop", event_pipeline},
      {"simulator calibration band, 20 seeds x 9.5 h", simulator_band},
      {"desynchronization diagnosis", desync_diagnosis},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << " -- "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
