// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Criteria that need full pipeline products drive the fibersense executable on
// the reference configuration; the rest call the library directly.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "fibersense/analysis/analysis.hpp"
#include "fibersense/botdr/botdr.hpp"
#include "fibersense/core/filters.hpp"
#include "fibersense/core/io.hpp"
#include "fibersense/core/rng.hpp"
#include "fibersense/core/stats.hpp"
#include "fibersense/das/das.hpp"
#include "fibersense/das/stream.hpp"
#include "fibersense/scenario/field.hpp"
#include "fibersense/scenario/wind.hpp"
#include "fibersense/sop/sop.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace fibersense;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Sub-checks of one criterion; the criterion passes when all of them do.
class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)), start_(clock::now()) {}

  void check(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    std::cout << fmt::format("    {} {}\n", ok ? "ok  " : "FAIL", what) << std::flush;
  }
  void note(const std::string& what) { std::cout << "    .... " << what << '\n' << std::flush; }

  bool finish() {
    const double s = std::chrono::duration<double>(clock::now() - start_).count();
    std::cout << fmt::format("{} AC{} {} ({:.1f} s)\n", ok_ ? "PASS" : "FAIL", id_, title_, s) << std::flush;
    return ok_;
  }

 private:
  using clock = std::chrono::steady_clock;
  int id_;
  std::string title_;
  clock::time_point start_;
  bool ok_ = true;
};

struct Env {
  std::string cli;
  fs::path data;
  fs::path work;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const Env& env, const fs::path& config, const fs::path& out, const std::string& verb) {
  const fs::path log = out.string() + ".log";
  const std::string cmd = fmt::format("'{}' -c '{}' -o '{}' {} >> '{}' 2>&1", env.cli, config.string(), out.string(),
                                      verb, log.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool full_run(const Env& env, const fs::path& config, const fs::path& out) {
  fs::create_directories(out.parent_path());
  for (const char* verb : {"simulate", "process", "report"}) {
    if (run_cli(env, config, out, verb) != 0) return false;
  }
  return true;
}

// Reference run, one modality at a time so each pipeline is timed on its own.
struct ReferenceRun {
  bool ok = true;
  std::vector<std::pair<std::string, double>> seconds;
};

ReferenceRun reference_run(const Env& env, const fs::path& out) {
  ReferenceRun r;
  const fs::path cfg = env.data / "run.json";
  fs::create_directories(out.parent_path());
  for (const char* m : {"das", "botdr", "sop"}) {
    const auto t = std::chrono::steady_clock::now();
    r.ok = r.ok && run_cli(env, cfg, out, fmt::format("simulate --modality {}", m)) == 0 &&
           run_cli(env, cfg, out, fmt::format("process --modality {}", m)) == 0;
    r.seconds.emplace_back(m, std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count());
    std::cout << fmt::format("    .... reference {} pipeline {:.0f} s\n", m, r.seconds.back().second) << std::flush;
  }
  r.ok = r.ok && run_cli(env, cfg, out, "report") == 0;
  return r;
}

bool within(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

// ---------------------------------------------------------------------------

bool botdr_round_trip(const Env& env) {
  Criterion c(1, "BOTDR round trip");
  const auto sc = scenario::load_scenario(env.data / "scenario.json");
  // 118 km at 10 m, default 2.5 us pulse
  botdr::BotdrConfig cfg;
  cfg.averages = 4000;
  cfg.single_shot_noise_std = sc.noise.botdr_single_shot_noise;
  cfg.seed = 20250805;
  const auto pos = core::PositionGrid::covering(0.0, sc.length_m(), 10.0);
  scenario::FieldSynthesizer synth(sc, pos, core::TimeGrid::make(sc.timeline.start, 1.0, 1));
  const auto before = synth.static_profile(scenario::Epoch::before);
  const auto after = synth.static_profile(scenario::Epoch::after);
  const std::vector<double> temp(pos.count, 0.0);

  const auto fit_before = botdr::fit_bfs(botdr::simulate_spectra(pos, before, temp, cfg, 0), cfg);
  const auto fit_after = botdr::fit_bfs(botdr::simulate_spectra(pos, after, temp, cfg, 1), cfg);
  const auto delta = botdr::strain_difference(fit_before, fit_after, cfg);

  std::size_t valid = 0;
  for (auto v : delta.valid) valid += v;
  c.check(valid == pos.count, fmt::format("{} of {} positions fitted", valid, pos.count));

  const double cell = cfg.resolution_m();
  struct Expect {
    double value, position_m, lo_m, hi_m;
  };
  for (const Expect& e : {Expect{180.0, 7000.0, 5000.0, 10000.0}, Expect{82.0, 750.0, 0.0, 3000.0}}) {
    // injected maximum, then recovered maximum, over the same window
    double inj = -1e300, inj_x = 0, rec = -1e300, rec_x = 0;
    for (std::size_t i = 0; i < pos.count; ++i) {
      const double x = pos.at(i);
      if (x < e.lo_m || x > e.hi_m) continue;
      if (after[i] - before[i] > inj) inj = after[i] - before[i], inj_x = x;
      if (delta.is_valid(i) && delta.values[i] > rec) rec = delta.values[i], rec_x = x;
    }
    // the injected peaks are plateaus; its extent is where the profile stays at the maximum
    double top_lo = inj_x, top_hi = inj_x;
    for (std::size_t i = 0; i < pos.count; ++i) {
      const double x = pos.at(i);
      if (x < e.lo_m || x > e.hi_m || after[i] - before[i] < inj - 1e-6 * inj) continue;
      top_lo = std::min(top_lo, x);
      top_hi = std::max(top_hi, x);
    }
    c.check(within(inj, e.value, 0.05) && e.position_m >= top_lo - 250.0 && e.position_m <= top_hi + 250.0,
            fmt::format("injected peak {:.1f} ue over {:.0f}-{:.0f} m (expect ~{} ue near {} m)", inj, top_lo, top_hi,
                        e.value, e.position_m));
    c.check(within(rec, inj, 0.10), fmt::format("recovered amplitude {:.1f} ue, {:+.1f}% of injected", rec,
                                                100.0 * (rec / inj - 1.0)));
    const double off = rec_x < top_lo ? rec_x - top_lo : (rec_x > top_hi ? rec_x - top_hi : 0.0);
    c.check(std::abs(off) <= cell, fmt::format("recovered maximum at {:.0f} m, {:+.0f} m outside the plateau (cell {:.0f} m)",
                                               rec_x, off, cell));
  }
  return c.finish();
}

bool constants() {
  Criterion c(2, "scan and resolution constants");
  const botdr::BotdrConfig cfg;
  const auto n = botdr::scan_grid(cfg).size();
  c.check(n == 71, fmt::format("scan_grid(defaults) has {} points", n));
  const double r25 = botdr::pulse_to_resolution(2.5e-6, cfg.group_index);
  const double r16 = botdr::pulse_to_resolution(16e-6, cfg.group_index);
  c.check(within(r25, 255.0, 0.03) && within(r25, 250.0, 0.03), fmt::format("2.5 us -> {:.2f} m", r25));
  c.check(within(r16, 1635.0, 0.03) && within(r16, 1600.0, 0.03), fmt::format("16 us -> {:.1f} m", r16));
  return c.finish();
}

bool averaging_law() {
  Criterion c(3, "averaging law");
  constexpr std::size_t kTrials = 200;
  // every position is one independent trial; 37.3 ue puts the peak between bins
  const auto pos = core::PositionGrid::make(0.0, 10.0, kTrials);
  const std::vector<double> strain(kTrials, 37.3), temp(kTrials, 0.0);
  auto center_std = [&](std::size_t averages) {
    botdr::BotdrConfig cfg;
    cfg.averages = averages;
    cfg.seed = 4242;
    const auto fit = botdr::fit_bfs(botdr::simulate_spectra(pos, strain, temp, cfg, 0), cfg);
    std::vector<double> centers;
    for (std::size_t i = 0; i < kTrials; ++i) {
      if (fit.valid[i]) centers.push_back(fit.bfs_hz[i]);
    }
    return std::pair{core::population_std(centers), centers.size()};
  };
  const auto [s1, n1] = center_std(1);
  const auto [sn, nn] = center_std(4000);
  c.check(n1 == kTrials && nn == kTrials, fmt::format("valid fits {} (N=1), {} (N=4000)", n1, nn));
  const double ratio = sn / s1, expect = 1.0 / std::sqrt(4000.0);
  c.check(within(ratio, expect, 0.15),
          fmt::format("std {:.4g} Hz / {:.4g} Hz = {:.5f}, 1/sqrt(4000) = {:.5f} ({:+.1f}%)", sn, s1, ratio, expect,
                      100.0 * (ratio / expect - 1.0)));
  return c.finish();
}

// ---------------------------------------------------------------------------

// Cells whose gauge window touches a change in coupling or oscillation.
std::vector<bool> near_discontinuity(const scenario::Scenario& sc, const core::PositionGrid& pos, double margin_m) {
  std::vector<double> edges;
  for (std::size_t k = 1; k < sc.segments.size(); ++k) {
    const auto& a = sc.segments[k - 1];
    const auto& b = sc.segments[k];
    const bool same_osc = a.oscillation.has_value() == b.oscillation.has_value() &&
                          (!a.oscillation || (a.oscillation->freq_hz == b.oscillation->freq_hz &&
                                              a.oscillation->amplitude_nstrain == b.oscillation->amplitude_nstrain));
    if (a.coupling != b.coupling || !same_osc) edges.push_back(b.start_m);
  }
  std::vector<bool> out(pos.count, false);
  for (std::size_t i = 0; i < pos.count; ++i) {
    const double x = pos.at(i);
    if (x - pos.start_m < margin_m || pos.at(pos.count - 1) - x < margin_m) out[i] = true;
    for (double e : edges) out[i] = out[i] || std::abs(x - e) <= margin_m;
  }
  return out;
}

struct Comparison {
  std::size_t cells = 0;
  std::size_t outside = 0;
  double worst_rel = 0.0;
  double worst_x = 0.0;
};

Comparison compare(const core::Waterfall& measured, const core::Waterfall& truth, const std::vector<bool>& skip,
                   double min_truth, double rel_tol) {
  Comparison r;
  for (std::size_t row = 0; row < truth.rows(); ++row) {
    for (std::size_t col = 0; col < truth.cols(); ++col) {
      const double t = truth(row, col);
      if (skip[col] || t < min_truth) continue;
      const double rel = std::abs(measured(row, col) - t) / t;
      ++r.cells;
      if (rel > rel_tol) ++r.outside;
      if (rel > r.worst_rel) r.worst_rel = rel, r.worst_x = truth.position.at(col);
    }
  }
  return r;
}

bool das_round_trip(const Env& env, const fs::path& ref_out, bool ref_ok) {
  Criterion c(4, "DAS round trip");
  const auto rc = app::load_run_config(env.data / "run.json");
  const auto& cfg = rc.das.instrument;
  const auto pos = rc.das_positions();
  const double margin = 0.5 * cfg.gauge_length_m + pos.spacing_m;
  const auto skip = near_discontinuity(rc.scenario, pos, margin);

  // noiseless: the same field through the forward model without phase noise
  {
    scenario::FieldSynthesizer synth(rc.scenario, pos, rc.das_time());
    auto quiet = cfg;
    quiet.phase_noise_std_rad = 0.0;
    das::DasStreamOptions opt;
    opt.block_t = rc.das.block_t;
    opt.block_x = rc.das.block_x;
    opt.truth_std = true;
    const auto res = das::run_das_stream(synth, quiet, opt);
    const auto& truth = *res.truth_std_nstrain;
    // below 0.01 nstrain the truth is only the numerical floor
    const auto cmp = compare(res.std_nstrain, truth, skip, 0.01, 0.05);
    c.check(cmp.cells > 0 && cmp.outside == 0,
            fmt::format("noiseless: {} of {} cells outside 5%, worst {:.2f}% at {:.0f} m", cmp.outside, cmp.cells,
                        100.0 * cmp.worst_rel, cmp.worst_x));
    double quiet_abs = 0.0;
    for (std::size_t i = 0; i < truth.values.size(); ++i) {
      if (truth.values[i] < 0.01 && !skip[i % truth.cols()])
        quiet_abs = std::max(quiet_abs, std::abs(double(res.std_nstrain.values[i]) - truth.values[i]));
    }
    c.note(fmt::format("noiseless: cells with truth < 0.01 nstrain differ by at most {:.2g} nstrain", quiet_abs));
  }

  if (!ref_ok) {
    c.check(false, "reference run did not complete");
    return c.finish();
  }
  const auto measured = core::read_waterfall(ref_out / "das" / "std.wf");
  const auto truth = core::read_waterfall(ref_out / "field" / "truth_std.wf");

  // noisy: judged where the field dominates the phase-noise floor
  const double floor = cfg.phase_noise_std_rad * das::phase_to_nanostrain(1.0, cfg);
  const auto cmp = compare(measured, truth, skip, 3.0 * floor, 0.15);
  c.check(cmp.cells > 0 && cmp.outside == 0,
          fmt::format("noisy: {} of {} cells (truth >= {:.3f} nstrain) outside 15%, worst {:.2f}% at {:.0f} m",
                      cmp.outside, cmp.cells, 3.0 * floor, 100.0 * cmp.worst_rel, cmp.worst_x));

  const auto it = std::max_element(measured.values.begin(), measured.values.end());
  const auto idx = static_cast<std::size_t>(it - measured.values.begin());
  const double peak_x = measured.position.at(idx % measured.cols());
  c.check(within(*it, 2.9, 0.20) && peak_x >= 5000.0 && peak_x <= 15000.0,
          fmt::format("max {:.3f} nstrain at {:.0f} m, {}", *it, peak_x,
                      core::format_utc(measured.time.at(idx / measured.cols()))));

  // pre-storm: blocks ending before the storm starts, 0-5 km, away from the
  // 5 km coupling step
  const auto storm = rc.storm_on_sim_clock();
  const double block_s = measured.time.dt_s;
  std::size_t rows = 0;
  double onshore = 0.0, onshore_x = 0.0;
  for (std::size_t r = 0; r < measured.rows(); ++r) {
    if (core::seconds_between(measured.time.at(r), storm->begin) < 0.5 * block_s) break;
    ++rows;
    for (std::size_t col = 0; col < measured.cols(); ++col) {
      const double x = measured.position.at(col);
      if (x > 5000.0 - margin) continue;
      if (measured(r, col) > onshore) onshore = measured(r, col), onshore_x = x;
    }
  }
  c.check(rows > 0 && onshore < 0.2,
          fmt::format("pre-storm 0-5 km: max {:.3f} nstrain at {:.0f} m over {} blocks", onshore, onshore_x, rows));
  return c.finish();
}

bool filter_check() {
  Criterion c(5, "SOP high-pass");
  constexpr double fs = 44100.0;
  sop::SopConfig cfg;
  cfg.sample_rate_hz = fs;
  cfg.pdl_db = 0.0;
  cfg.detector_noise_std = 0.0;
  const core::UtcTime t0 = core::parse_utc("2025-08-04T00:00:00Z");
  for (auto [freq, expect_db, tol, seconds, settle] :
       {std::tuple{0.2, -20.0, 0.5, 40.0, 15.0}, std::tuple{2.0, -3.0, 0.3, 10.0, 3.0}}) {
    // s1 oscillates, so each photodiode sees a sine of amplitude a / 2
    const double a = 0.5;
    sop::StateSeries st{core::TimeGrid::at_rate(t0, fs, seconds), {}};
    for (std::size_t i = 0; i < st.time.count; ++i) {
      const double s1 = a * std::sin(2.0 * kPi * freq * st.time.offset_s(i));
      st.states.push_back({s1, std::sqrt(1.0 - s1 * s1), 0.0});
    }
    const auto tr = sop::detect(st, cfg);
    const auto from = static_cast<std::size_t>(settle * fs);
    const auto n = static_cast<std::size_t>(std::floor((tr.px.size() - from) * freq / fs) * fs / freq);
    double sc = 0, cc = 0;
    for (std::size_t i = from; i < from + n; ++i) {
      const double ph = 2.0 * kPi * freq * static_cast<double>(i) / fs;
      sc += tr.px[i] * std::sin(ph);
      cc += tr.px[i] * std::cos(ph);
    }
    const double db = 20.0 * std::log10(2.0 * std::hypot(sc, cc) / static_cast<double>(n) / (a / 2));
    c.check(std::abs(db - expect_db) <= tol,
            fmt::format("{} Hz: {:.3f} dB (expect {} +- {} dB)", freq, db, expect_db, tol));
  }
  return c.finish();
}

// ---------------------------------------------------------------------------

struct RowRange {
  std::size_t begin = 0, end = 0;
};

// Spectrogram frames lying wholly before the storm, and wholly inside it.
std::pair<RowRange, RowRange> calm_and_storm_rows(const core::Waterfall& spec, double window_s,
                                                  const scenario::TimeWindow& storm) {
  RowRange calm, inside;
  bool started = false;
  for (std::size_t r = 0; r < spec.rows(); ++r) {
    const double to_begin = core::seconds_between(spec.time.at(r), storm.begin);
    const double to_end = core::seconds_between(spec.time.at(r), storm.end);
    if (to_begin >= 0.5 * window_s) calm.end = r + 1;
    if (to_begin <= -0.5 * window_s && to_end >= 0.5 * window_s) {
      if (!started) inside.begin = r, started = true;
      inside.end = r + 1;
    }
  }
  return {calm, inside};
}

std::optional<double> tone_near(const core::Waterfall& spec, RowRange rows, double freq, double lo, double hi,
                                double prominence) {
  if (rows.end <= rows.begin) return std::nullopt;
  analysis::ToneSearchOptions o;
  o.row_begin = rows.begin;
  o.row_end = rows.end;
  for (const auto& t : analysis::find_tones(spec, lo, hi, prominence, o)) {
    if (std::abs(t.freq_hz - freq) <= 0.1) return t.freq_hz;
  }
  return std::nullopt;
}

std::string show(std::optional<double> f) { return f ? fmt::format("{:.3f} Hz", *f) : std::string("none"); }

// Columns of the DAS tone-power table keyed by header name.
std::map<std::string, std::vector<double>> read_table(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  std::vector<std::string> names;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) names.push_back(cell);
  std::map<std::string, std::vector<double>> cols;
  while (std::getline(is, line)) {
    std::stringstream ls(line);
    std::size_t k = 0;
    for (std::string cell; std::getline(ls, cell, ',') && k < names.size(); ++k)
      cols[names[k]].push_back(std::stod(cell));
  }
  return cols;
}

double mean_over(const std::vector<double>& x, const std::vector<double>& v, double lo, double hi) {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= lo && x[i] < hi) s += v[i], ++n;
  }
  return n ? s / n : 0.0;
}

bool tone_coherence(const Env& env, const fs::path& ref_out, bool ref_ok) {
  Criterion c(6, "tone coherence");
  if (!ref_ok) {
    c.check(false, "reference run did not complete");
    return c.finish();
  }
  const auto rc = app::load_run_config(env.data / "run.json");
  const auto storm = *rc.storm_on_sim_clock();
  const double lo = rc.analysis.tone_lo_hz, hi = rc.analysis.tone_hi_hz, prom = rc.analysis.prominence_db;
  const auto* fjord = rc.scenario.find_segment("fjord-resonance");
  const auto* offshore = rc.scenario.find_segment("offshore-resonance");

  // DAS: spectrogram at each tap, per window
  for (const auto& entry : fs::directory_iterator(ref_out / "das")) {
    const auto name = entry.path().filename().string();
    if (name.rfind("spectrogram_", 0) != 0) continue;
    json meta;
    const auto spec = core::read_waterfall(entry.path(), &meta);
    const double x = meta.at("position_m").get<double>();
    const double win = 1.0 / spec.position.spacing_m;
    const auto [calm, inside] = calm_and_storm_rows(spec, win, storm);
    const auto f22_calm = tone_near(spec, calm, 2.2, lo, hi, prom);
    const auto f22_storm = tone_near(spec, inside, 2.2, lo, hi, prom);
    const auto f24_calm = tone_near(spec, calm, 2.4, lo, hi, prom);
    const auto f24_storm = tone_near(spec, inside, 2.4, lo, hi, prom);
    if (fjord->contains(x)) {
      c.check(f22_storm && !f22_calm, fmt::format("DAS tap {:.0f} m (fjord): 2.2 Hz storm {}, pre-storm {}", x,
                                                  show(f22_storm), show(f22_calm)));
    } else if (offshore->contains(x)) {
      c.check(f24_storm && f24_calm, fmt::format("DAS tap {:.0f} m (offshore): 2.4 Hz pre-storm {}, storm {}", x,
                                                 show(f24_calm), show(f24_storm)));
      c.check(!f22_storm && !f22_calm, fmt::format("DAS tap {:.0f} m (offshore): 2.2 Hz storm {}, pre-storm {}", x,
                                                   show(f22_storm), show(f22_calm)));
    }
  }

  // DAS: where the narrowband power sits along the fiber
  const auto table = read_table(ref_out / "das" / "tone_power.csv");
  const auto& x = table.at("position_m");
  auto ratio_db = [&](const std::string& col, const scenario::CableSegment* seg) {
    const auto& v = table.at(col);
    const double in = mean_over(x, v, seg->start_m, seg->end_m);
    const double rest = 0.5 * (mean_over(x, v, 0.0, seg->start_m) + mean_over(x, v, seg->end_m, 1e12));
    return 10.0 * std::log10(in / rest);
  };
  const double f_storm = ratio_db("p_2.2hz_storm", fjord), f_calm = ratio_db("p_2.2hz_calm", fjord);
  c.check(f_storm >= 10.0 && f_calm < 3.0,
          fmt::format("DAS 2.2 Hz power in the fjord segment vs elsewhere: storm {:+.1f} dB, pre-storm {:+.1f} dB",
                      f_storm, f_calm));
  const double o_storm = ratio_db("p_2.4hz_storm", offshore), o_calm = ratio_db("p_2.4hz_calm", offshore);
  c.check(o_storm >= 10.0 && o_calm >= 10.0,
          fmt::format("DAS 2.4 Hz power in the offshore segment vs elsewhere: storm {:+.1f} dB, pre-storm {:+.1f} dB",
                      o_storm, o_calm));

  // SOP: one spectrogram for the whole link
  {
    const auto spec = core::read_waterfall(ref_out / "sop" / "spectrogram.wf");
    const double win = 1.0 / spec.position.spacing_m;  // frame length is 1 / bin spacing
    const auto [calm, inside] = calm_and_storm_rows(spec, win, storm);
    const auto f22_calm = tone_near(spec, calm, 2.2, lo, hi, prom);
    const auto f22_storm = tone_near(spec, inside, 2.2, lo, hi, prom);
    const auto f24_calm = tone_near(spec, calm, 2.4, lo, hi, prom);
    const auto f24_storm = tone_near(spec, inside, 2.4, lo, hi, prom);
    c.note(fmt::format("SOP frames: {} pre-storm, {} storm ({:.1f} s window)", calm.end - calm.begin,
                       inside.end - inside.begin, win));
    c.check(f22_storm && !f22_calm,
            fmt::format("SOP 2.2 Hz: storm {}, pre-storm {}", show(f22_storm), show(f22_calm)));
    c.check(f24_storm && f24_calm, fmt::format("SOP 2.4 Hz: pre-storm {}, storm {}", show(f24_calm), show(f24_storm)));
  }
  return c.finish();
}

bool wind_fusion(const Env& env) {
  Criterion c(7, "wind fusion");
  const auto st = scenario::ingest_wind(std::vector<fs::path>{env.data / "wind.csv"});
  const auto grid = core::TimeGrid::make(core::parse_utc("2025-08-04T00:00:00Z"), 600.0, 72 * 6);
  const auto fused = scenario::fuse_wind(st, grid);
  const auto it = std::max_element(fused.values.begin(), fused.values.end());
  const auto when = core::format_utc(grid.at(static_cast<std::size_t>(it - fused.values.begin())));
  c.check(std::abs(*it - 29.0) <= 0.5 && when.substr(0, 10) == "2025-08-05",
          fmt::format("{} stations, fused peak {:.2f} m/s at {}", st.size(), *it, when));
  double worst = 0.0;
  for (const auto& s : st) {
    const auto one = scenario::fuse_wind({s}, grid);
    const auto two = scenario::fuse_wind({s, s}, grid);
    for (std::size_t i = 0; i < grid.count; ++i) worst = std::max(worst, std::abs(one.values[i] - two.values[i]));
  }
  c.check(worst <= 1e-12, fmt::format("two identical stations fuse to identity (max diff {:.1g})", worst));
  return c.finish();
}

bool determinism(const Env& env) {
  Criterion c(8, "determinism");
  const fs::path cfg = env.data / "run_small.json";
  const fs::path a = env.work / "small-a", b = env.work / "small-b";
  const bool ok = full_run(env, cfg, a) && full_run(env, cfg, b);
  c.check(ok, "two simulate/process/report runs with the same seed");
  if (ok) {
    for (const char* f : {"manifest.simulate.json", "manifest.process.json", "manifest.report.json", "report.json"}) {
      const auto x = slurp(a / f);
      c.check(!x.empty() && x == slurp(b / f), fmt::format("{} byte-identical ({} bytes)", f, x.size()));
    }
  }
  return c.finish();
}

// ---------------------------------------------------------------------------

bool invariants(const Env& env) {
  Criterion c(9, "invariant suites");
  core::Rng rng(977);
  const core::UtcTime t0 = core::parse_utc("2025-08-04T00:00:00Z");

  // unwrap: 1e6 sequences of 16 steps below pi, wrapped then unwrapped
  {
    constexpr std::size_t kSeq = 100000, kLen = 16;
    double worst = 0.0;
    for (int batch = 0; batch < 10; ++batch) {
      auto truth = core::Waterfall::zeros(core::TimeGrid::make(t0, 1.0, kLen), core::PositionGrid::make(0, 1, kSeq),
                                          core::Unit::radian);
      for (std::size_t s = 0; s < kSeq; ++s) {
        double v = (rng.uniform() * 2.0 - 1.0) * kPi * 0.999;
        truth(0, s) = static_cast<float>(v);
        for (std::size_t r = 1; r < kLen; ++r) {
          v += (rng.uniform() * 2.0 - 1.0) * kPi * 0.99;
          truth(r, s) = static_cast<float>(v);
        }
      }
      das::PhaseRecord p{truth};
      for (auto& v : p.phase.values) v = das::wrap_phase_float(v);
      const auto u = das::unwrap_time(p);
      for (std::size_t i = 0; i < u.values.size(); ++i)
        worst = std::max(worst, std::abs(double(u.values[i]) - double(truth.values[i])));
    }
    c.check(worst < 1e-4, fmt::format("unwrap(wrap(x)) == x on 1e6 sequences, max error {:.2g} rad", worst));
  }

  // Poincare norm through the reference cascade
  {
    const auto sc = scenario::load_scenario(env.data / "scenario.json");
    sop::SopConfig cfg;
    cfg.rotation_drift_rad_s = 0.2;
    const sop::Cascade cascade(sop::plate_layout(sc, cfg), cfg);
    std::vector<double> strain(cascade.plates().size());
    double worst = 0.0;
    for (int t = 0; t < 100000; ++t) {
      for (auto& v : strain) v = 3e-8 * rng.normal();
      const auto s = cascade.propagate(strain, t * 0.01);
      worst = std::max(worst, std::abs(std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) - 1.0));
    }
    c.check(worst <= 1e-9, fmt::format("Stokes norm drift {:.2g} over 1e5 states", worst));
  }

  // std invariance to constant offsets, in strain and in wrapped phase
  {
    auto w = core::Waterfall::zeros(core::TimeGrid::make(t0, 1.0 / 600, 6000), core::PositionGrid::make(0, 10, 50),
                                    core::Unit::nanostrain);
    for (auto& v : w.values) v = static_cast<float>(rng.normal());
    auto shifted = w;
    for (auto& v : shifted.values) v += 37.5f;
    const auto a = core::windowed_std(w, 600, 1), b = core::windowed_std(shifted, 600, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      worst = std::max(worst, std::abs(double(a.values[i]) - b.values[i]) / a.values[i]);

    das::DasConfig cfg;
    cfg.phase_noise_std_rad = 0.2;
    cfg.seed = 3;
    scenario::StrainField f;
    f.position = w.position;
    f.time = w.time;
    f.dynamic_nstrain = w.values;
    for (auto& v : f.dynamic_nstrain) v *= 4.0f;
    f.static_before_ue.assign(w.cols(), 0.0);
    f.static_after_ue = f.static_relaxed_ue = f.temperature_delta_k = f.static_before_ue;
    const auto p = das::simulate_phase(f, cfg);
    auto q = p;
    for (std::size_t col = 0; col < q.phase.cols(); ++col) {
      const double off = (rng.uniform() * 2.0 - 1.0) * kPi;
      for (std::size_t r = 0; r < q.phase.rows(); ++r) q.phase(r, col) = das::wrap_phase_float(q.phase(r, col) + off);
    }
    const auto sa = das::std_waterfall(p, cfg, 600, 1), sb = das::std_waterfall(q, cfg, 600, 1);
    double worst_phase = 0.0;
    for (std::size_t i = 0; i < sa.values.size(); ++i)
      worst_phase = std::max(worst_phase, std::abs(double(sa.values[i]) - sb.values[i]) / sa.values[i]);
    c.check(worst < 1e-5 && worst_phase < 1e-3,
            fmt::format("block std under offsets: relative change {:.2g} (strain), {:.2g} (phase)", worst,
                        worst_phase));
  }

  // correlation: affine maps of either input leave r unchanged, a flip negates it
  {
    std::vector<double> wind, das_row;
    for (int i = 0; i < 400; ++i) {
      wind.push_back(8.0 + 6.0 * rng.normal());
      das_row.push_back(0.1 * wind.back() + 0.4 * rng.normal());
    }
    auto series = [&](const std::vector<double>& v) {
      return core::Series{core::TimeGrid::make(t0, 10.0, v.size()), v, core::Unit::meters_per_second};
    };
    auto waterfall = [&](const std::vector<double>& v) {
      auto w = core::Waterfall::zeros(core::TimeGrid::make(t0, 10.0, v.size()), core::PositionGrid::make(0, 10, 1),
                                      core::Unit::nanostrain);
      for (std::size_t i = 0; i < v.size(); ++i) w.values[i] = static_cast<float>(v[i]);
      return w;
    };
    double worst = 0.0;
    for (auto method : {analysis::CorrelationMethod::pearson, analysis::CorrelationMethod::spearman}) {
      const double r0 = analysis::correlate_wind_activity(series(wind), waterfall(das_row), 0, 0, method);
      for (int t = 0; t < 50; ++t) {
        const double a = 0.05 + 20.0 * rng.uniform(), b = (rng.uniform() - 0.5) * 200.0;
        std::vector<double> w2, w3, d2;
        for (double v : wind) w2.push_back(a * v + b), w3.push_back(-a * v + b);
        for (double v : das_row) d2.push_back(0.5 * a * v + 0.01 * b);
        worst = std::max(worst, std::abs(analysis::correlate_wind_activity(series(w2), waterfall(das_row), 0, 0, method) - r0));
        worst = std::max(worst, std::abs(analysis::correlate_wind_activity(series(wind), waterfall(d2), 0, 0, method) - r0));
        worst = std::max(worst, std::abs(analysis::correlate_wind_activity(series(w3), waterfall(das_row), 0, 0, method) + r0));
      }
    }
    c.check(worst < 1e-5, fmt::format("correlation under affine maps: max change {:.2g}", worst));
  }
  return c.finish();
}

// ---------------------------------------------------------------------------
// Module examples stated on the reference scenario. Not acceptance criteria,
// but they need the same desk-scale run, so they are checked here.

bool example(bool ok, const std::string& what) {
  std::cout << fmt::format("{} EX {}\n", ok ? "PASS" : "FAIL", what) << std::flush;
  return ok;
}

int reference_examples(const Env& env, const fs::path& out, const ReferenceRun& ref) {
  int failed = 0;
  auto tally = [&](bool ok) { failed += ok ? 0 : 1; };
  for (const auto& [m, sec] : ref.seconds)
    tally(example(ref.ok && sec < 300.0, fmt::format("{} pipeline on the reference grid in {:.0f} s (budget 300 s)", m, sec)));
  if (!ref.ok) return failed;

  const auto rc = app::load_run_config(env.data / "run.json");
  const json report = json::parse(slurp(out / "report.json"));

  // noiseless truth: peak per-position std over the fjord exit
  {
    const auto truth = core::read_waterfall(out / "field" / "truth_std.wf");
    double peak = 0.0;
    for (std::size_t r = 0; r < truth.rows(); ++r)
      for (std::size_t col = 0; col < truth.cols(); ++col) {
        const double x = truth.position.at(col);
        if (x >= 5000.0 && x < 13500.0) peak = std::max(peak, double(truth(r, col)));
      }
    tally(example(within(peak, 2.9, 0.15), fmt::format("field: fjord-exit peak std {:.3f} nstrain (2.9 +- 15%)", peak)));
  }

  // strain change shape: rising over 6.0-6.7 km, flat over 7.6-8.3 km
  {
    const auto delta = core::read_profile_csv(out / "botdr" / "delta_after.csv", core::Unit::microstrain);
    auto mean = [&](double lo, double hi) {
      std::vector<double> x(delta.position.count);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = delta.position.at(i);
      return mean_over(x, delta.values, lo, hi);
    };
    const double a = mean(6000, 6200), b = mean(6200, 6450), c = mean(6450, 6700);
    tally(example(a < b && b < c, fmt::format("botdr: rises over 6.0-6.7 km ({:.1f}, {:.1f}, {:.1f} ue)", a, b, c)));
    const double half = 0.5 * rc.botdr.instrument.resolution_m();
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < delta.position.count; ++i) {
      const double x = delta.position.at(i);
      if (x < 7600.0 + half || x > 8300.0 - half || !delta.is_valid(i)) continue;
      lo = std::min(lo, delta.values[i]);
      hi = std::max(hi, delta.values[i]);
    }
    tally(example(hi - lo <= 0.1 * hi,
                  fmt::format("botdr: plateau over 7.6-8.3 km ({:.1f} to {:.1f} ue inside)", lo, hi)));
  }

  // high-resolution pulse on the same static profiles
  {
    botdr::BotdrConfig cfg = rc.botdr.instrument;
    cfg.pulse_width_us = 1.0;
    const auto pos = rc.botdr_positions();
    const auto before = core::read_profile_csv(out / "field" / "static_before.csv", core::Unit::microstrain);
    const auto after = core::read_profile_csv(out / "field" / "static_after.csv", core::Unit::microstrain);
    const std::vector<double> temp(pos.count, 0.0);
    const auto d = botdr::strain_difference(botdr::fit_bfs(botdr::simulate_spectra(pos, before.values, temp, cfg, 10), cfg),
                                            botdr::fit_bfs(botdr::simulate_spectra(pos, after.values, temp, cfg, 11), cfg),
                                            cfg);
    for (auto [value, lo_m, hi_m, plat_lo, plat_hi] :
         {std::tuple{180.0, 5000.0, 10000.0, 6700.0, 7200.0}, std::tuple{82.0, 0.0, 3000.0, 600.0, 900.0}}) {
      double best = -1e300, at = 0;
      for (std::size_t i = 0; i < pos.count; ++i) {
        const double x = pos.at(i);
        if (x >= lo_m && x <= hi_m && d.is_valid(i) && d.values[i] > best) best = d.values[i], at = x;
      }
      const double cell = cfg.resolution_m();
      tally(example(within(best, value, 0.10) && at >= plat_lo - cell && at <= plat_hi + cell,
                    fmt::format("botdr 1 us: {:.1f} ue at {:.0f} m (expect {} ue on {:.0f}-{:.0f} m, cell {:.0f} m)",
                                best, at, value, plat_lo, plat_hi, cell)));
    }
  }

  // SOP storm/pre-storm fluctuation
  {
    const double storm = report.at("sop_fluctuation").at("storm"), calm = report.at("sop_fluctuation").at("calm");
    tally(example(storm >= 3.0 * calm, fmt::format("sop: storm/pre-storm fluctuation {:.4f}/{:.4f} = {:.2f} (>= 3)",
                                                    storm, calm, storm / calm)));
  }

  // wind correlation over the transition segments
  {
    double worst = 1.0;
    std::size_t n = 0;
    for (const auto& c : report.at("correlations")) {
      const auto* seg = rc.scenario.find_segment(c.at("segment").get<std::string>());
      if (seg && seg->kind == scenario::SegmentKind::transition) worst = std::min(worst, c.at("r").get<double>()), ++n;
    }
    tally(example(n > 0 && worst >= 0.8, fmt::format("analysis: {} transition segments, lowest r = {:.3f} (>= 0.8)", n, worst)));
  }

  // colocation flags
  {
    bool seven = false;
    for (const auto& p : report.at("strain_peaks")) {
      if (std::abs(p.at("position_m").get<double>() - 7000.0) <= 500.0 && p.at("colocated").get<bool>()) seven = true;
    }
    tally(example(seven, "analysis: strain peak near 7 km colocated with a DAS hot span"));
    bool shelf = false;
    for (const auto& h : report.at("das_hot_spans")) {
      if (h.at("start_m").get<double>() <= 15000.0 && h.at("end_m").get<double>() >= 15000.0 &&
          !h.at("static_feature").get<bool>())
        shelf = true;
    }
    tally(example(shelf, "analysis: 15 km hot span reported as dynamic-only"));
  }
  return failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the fibersense pipeline"};
  Env env;
  app.add_option("--cli", env.cli, "fibersense executable")->required();
  app.add_option("--data", env.data, "Reference data directory")->required();
  app.add_option("--work", env.work, "Scratch directory (wiped)")->required();
  std::vector<int> only;
  app.add_option("--only", only, "Run just these criteria");
  bool examples = true;
  app.add_flag("!--no-examples", examples, "Skip the reference-scenario examples");
  CLI11_PARSE(app, argc, argv);
  auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  fs::remove_all(env.work);
  fs::create_directories(env.work);

  int failed = 0;
  auto tally = [&](bool ok) { failed += ok ? 0 : 1; };
  try {
    if (want(2)) tally(constants());
    if (want(5)) tally(filter_check());
    if (want(7)) tally(wind_fusion(env));
    if (want(3)) tally(averaging_law());
    if (want(9)) tally(invariants(env));
    if (want(1)) tally(botdr_round_trip(env));
    if (want(8)) tally(determinism(env));

    if (want(4) || want(6) || examples) {
      const fs::path ref_out = env.work / "reference";
      std::cout << "    .... reference run (20 km DAS, 118 km BOTDR, 30 min SOP at 44.1 kHz)\n" << std::flush;
      const auto ref = reference_run(env, ref_out);
      if (want(4)) tally(das_round_trip(env, ref_out, ref.ok));
      if (want(6)) tally(tone_coherence(env, ref_out, ref.ok));
      if (examples) failed += reference_examples(env, ref_out, ref);
    }
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << '\n';
    return 1;
  }
  std::cout << (failed ? fmt::format("{} checks failed\n", failed) : std::string("all checks passed\n"));
  return failed ? 1 : 0;
}
