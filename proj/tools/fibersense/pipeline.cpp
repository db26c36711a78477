#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <fmt/format.h>
#include <json.hpp>

#include "fibersense/analysis/report.hpp"
#include "fibersense/core/error.hpp"
#include "fibersense/core/io.hpp"
#include "fibersense/core/parallel.hpp"
#include "fibersense/core/stats.hpp"
#include "fibersense/das/stream.hpp"
#include "manifest.hpp"
#include "plots.hpp"

namespace fibersense::app {

namespace fs = std::filesystem;
using nlohmann::json;
using scenario::Epoch;

namespace {

constexpr Epoch kEpochs[] = {Epoch::before, Epoch::after, Epoch::relaxed};

void log(const std::string& msg) { std::cerr << "fibersense: " << msg << '\n'; }

fs::path root_of(const RunConfig& rc) {
  fs::create_directories(rc.output);
  return rc.output;
}

void apply_jobs(const RunConfig& rc) {
  if (rc.jobs > 0) core::set_default_jobs(rc.jobs);
}

// Adds the listed files to a stage manifest, keeping entries from earlier
// partial runs of the same stage.
void update_manifest(const fs::path& root, const char* name, const char* stage, const std::vector<std::string>& rels) {
  Manifest m = Manifest::load_or_empty(root / name, stage);
  for (const auto& r : rels) m.add(root, r);
  m.write(root / name);
}

void require(const fs::path& root, const std::string& rel, const char* producer) {
  if (!fs::exists(root / rel)) {
    throw ConfigError(fmt::format("'{}' is missing; run `{}` first", (root / rel).string(), producer));
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("'{}': malformed JSON: {}", path.string(), e.what()));
  }
}

json tone_to_json(const analysis::ToneDetection& t) {
  return {{"freq_hz", t.freq_hz},
          {"begin", core::format_utc(t.begin)},
          {"end", core::format_utc(t.end)},
          {"position_m", t.position_m ? json(*t.position_m) : json(nullptr)},
          {"prominence_db", t.prominence_db}};
}

analysis::ToneDetection tone_from_json(const json& j, const fs::path& source) {
  try {
    analysis::ToneDetection t;
    t.freq_hz = j.at("freq_hz").get<double>();
    t.begin = core::parse_utc(j.at("begin").get<std::string>());
    t.end = core::parse_utc(j.at("end").get<std::string>());
    if (!j.at("position_m").is_null()) t.position_m = j.at("position_m").get<double>();
    t.prominence_db = j.at("prominence_db").get<double>();
    return t;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("'{}': malformed tone entry: {}", source.string(), e.what()));
  }
}

std::string tag_m(double x) { return fmt::format("{:06.0f}m", x); }

// Frame index of time t on a grid, clamped to [0, count].
std::size_t frame_at(const core::TimeGrid& g, core::UtcTime t) {
  const double u = std::ceil(core::seconds_between(g.t0, t) / g.dt_s - 1e-9);
  return static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(g.count)));
}

// Pre-storm and storm row ranges of a time axis; without a storm window the
// whole axis is one "all" range.
struct Window {
  std::string name;
  std::size_t begin;
  std::size_t end;
};

std::vector<Window> storm_windows(const RunConfig& rc, const core::TimeGrid& g) {
  const auto storm = rc.storm_on_sim_clock();
  if (!storm) return {{"all", 0, g.count}};
  const std::size_t b = frame_at(g, storm->begin);
  const std::size_t e = frame_at(g, storm->end);
  std::vector<Window> w;
  if (b > 0) w.push_back({"calm", 0, b});
  if (e > b) w.push_back({"storm", b, e});
  return w;
}

core::Series wind_series(const RunConfig& rc) {
  double duration = 0.0;
  if (rc.das.enabled) duration = std::max(duration, rc.das.duration_s);
  if (rc.sop.enabled) duration = std::max(duration, rc.sop.duration_s);
  if (duration <= 0.0) duration = 1.0;
  const auto n = static_cast<std::size_t>(std::floor(duration)) + 1;
  return analysis::wind_on_sim_clock(rc.scenario, core::TimeGrid::make(rc.scenario.timeline.start, 1.0, n));
}

core::PositionGrid static_grid(const RunConfig& rc) {
  return rc.botdr.enabled ? rc.botdr_positions() : core::PositionGrid::covering(0.0, rc.scenario.length_m(), 10.0);
}

scenario::FieldSynthesizer one_frame_synth(const RunConfig& rc, const core::PositionGrid& grid) {
  return scenario::FieldSynthesizer(rc.scenario, grid, core::TimeGrid::make(rc.scenario.timeline.start, 1.0, 1));
}

std::vector<std::string> simulate_field(const RunConfig& rc) {
  const fs::path root = root_of(rc);
  std::vector<std::string> out;
  core::write_series_csv(root / paths::kWind, wind_series(rc));
  out.push_back(paths::kWind);
  const auto grid = static_grid(rc);
  auto synth = one_frame_synth(rc, grid);
  for (Epoch e : kEpochs) {
    core::Profile p = core::Profile::filled(grid, 0.0, core::Unit::microstrain);
    p.values = synth.static_profile(e);
    const std::string rel = fmt::format("field/static_{}.csv", scenario::to_string(e));
    core::write_profile_csv(root / rel, p, "static_ue");
    out.push_back(rel);
  }
  return out;
}

das::DasStreamOptions das_options(const RunConfig& rc) {
  das::DasStreamOptions opt;
  opt.block_t = rc.das.block_t;
  opt.block_x = rc.das.block_x;
  opt.tap_positions_m = rc.das.taps_m;
  const core::TimeGrid time = rc.das_time();
  for (double f : rc.das.localize_hz) {
    for (const auto& w : storm_windows(rc, time)) opt.tones.push_back({f, w.begin, w.end - w.begin});
  }
  return opt;
}

core::Waterfall tap_waterfall(const core::Series& s, double x) {
  return core::Waterfall{s.time, core::PositionGrid::make(x, 1.0, 1), core::AxisKind::position, s.unit,
                         std::vector<float>(s.values.begin(), s.values.end())};
}

core::StftOptions stft(std::size_t window) { return core::StftOptions{window, 0.5, core::WindowKind::hann}; }

// Tone detections in a spectrogram, one pass per pre-storm/storm window.
std::vector<analysis::ToneDetection> detect_tones(const RunConfig& rc, const core::Waterfall& spec) {
  std::vector<analysis::ToneDetection> out;
  for (const auto& w : storm_windows(rc, spec.time)) {
    if (w.end <= w.begin) continue;
    analysis::ToneSearchOptions o;
    o.row_begin = w.begin;
    o.row_end = w.end;
    auto found = analysis::find_tones(spec, rc.analysis.tone_lo_hz, rc.analysis.tone_hi_hz, rc.analysis.prominence_db, o);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

}  // namespace

void das_simulate(const RunConfig& rc) {
  apply_jobs(rc);
  const fs::path root = root_of(rc);
  const auto pos = rc.das_positions();
  const auto time = rc.das_time();
  log(fmt::format("das: synthesizing {} channels x {} frames", pos.count, time.count));
  scenario::FieldSynthesizer synth(rc.scenario, pos, time);
  core::Waterfall truth;
  std::vector<std::string> files;
  if (rc.das.store_phase) {
    fs::create_directories((root / paths::kPhase).parent_path());
    core::ArrayWriter w(root / paths::kPhase, das::phase_header(pos, time, rc.das.instrument));
    das::DasStreamOptions opt;
    opt.block_t = rc.das.block_t;
    opt.block_x = rc.das.block_x;
    opt.truth_std = true;
    auto res = das::run_das_stream(synth, rc.das.instrument, opt, &w);
    w.finish();
    truth = std::move(*res.truth_std_nstrain);
    files.push_back(paths::kPhase);
  } else {
    truth = scenario::dynamic_block_std(synth, rc.das.block_t, rc.das.block_x);
  }
  core::write_waterfall(root / paths::kTruthStd, truth,
                        {{"content", "das_truth_std"}, {"block_t", rc.das.block_t}, {"block_x", rc.das.block_x}});
  files.push_back(paths::kTruthStd);
  update_manifest(root, paths::kSimulateManifest, "simulate", files);
}

void das_process(const RunConfig& rc) {
  apply_jobs(rc);
  const fs::path root = root_of(rc);
  require(root, paths::kTruthStd, "das simulate");
  const auto opt = das_options(rc);
  das::DasStreamResult res;
  if (rc.das.store_phase) {
    require(root, paths::kPhase, "das simulate");
    core::ArrayReader reader(root / paths::kPhase);
    const das::DasConfig cfg = das::config_from_header(reader.header());
    log("das: processing the stored phase record");
    res = das::process_phase_file(reader, cfg, opt);
  } else {
    log("das: regenerating the phase record from the seed and processing it");
    scenario::FieldSynthesizer synth(rc.scenario, rc.das_positions(), rc.das_time());
    res = das::run_das_stream(synth, rc.das.instrument, opt);
  }

  std::vector<std::string> files;
  core::write_waterfall(root / paths::kDasStd, res.std_nstrain,
                        {{"content", "das_std"}, {"block_t", rc.das.block_t}, {"block_x", rc.das.block_x}});
  files.push_back(paths::kDasStd);

  // Band power along the fiber for each requested frequency and window.
  const auto windows = storm_windows(rc, rc.das_time());
  {
    std::ofstream os(root / paths::kDasTonePower);
    os << "position_m";
    for (double f : rc.das.localize_hz) {
      for (const auto& w : windows) os << ',' << fmt::format("p_{}hz_{}", core::format_number(f), w.name);
    }
    os << '\n';
    const auto grid = rc.das_positions();
    for (std::size_t i = 0; i < grid.count; ++i) {
      os << core::format_number(grid.at(i));
      for (const auto& p : res.tone_power) os << ',' << core::format_number(p.values[i]);
      os << '\n';
    }
  }
  files.push_back(paths::kDasTonePower);

  std::vector<analysis::ToneDetection> tones;
  std::vector<core::Waterfall> spectrograms;
  for (std::size_t k = 0; k < res.taps.size(); ++k) {
    const double x = rc.das.taps_m[k];
    const std::string tap_rel = fmt::format("das/tap_{}.wf", tag_m(x));
    core::write_waterfall(root / tap_rel, tap_waterfall(res.taps[k], x), {{"content", "das_tap"}});
    files.push_back(tap_rel);
    const auto spec = core::stft_spectrogram(res.taps[k], stft(rc.analysis.das_stft_window));
    const std::string spec_rel = fmt::format("das/spectrogram_{}.wf", tag_m(x));
    core::write_waterfall(root / spec_rel, spec, {{"content", "das_spectrogram"}, {"position_m", x}});
    files.push_back(spec_rel);
    for (auto t : detect_tones(rc, spec)) {
      // Localize: band-power maximum along the fiber for the nearest
      // localized frequency over the same window.
      t.position_m = x;
      std::size_t idx = 0;
      for (double f : rc.das.localize_hz) {
        for (const auto& w : windows) {
          const auto& prof = res.tone_power[idx++];
          const bool same_window = rc.das_time().at(w.begin) <= t.begin && t.begin <= rc.das_time().at(w.end - 1);
          if (std::abs(f - t.freq_hz) <= 0.1 && same_window) {
            const auto it = std::max_element(prof.values.begin(), prof.values.end());
            t.position_m = prof.position.at(static_cast<std::size_t>(it - prof.values.begin()));
          }
        }
      }
      tones.push_back(t);
    }
    spectrograms.push_back(spec);
  }
  json tj = json::array();
  for (const auto& t : tones) tj.push_back(tone_to_json(t));
  write_json(root / paths::kDasTones, {{"taps_m", rc.das.taps_m}, {"tones", tj}});
  files.push_back(paths::kDasTones);

  auto plot_files = write_das_plots(root, res.std_nstrain, spectrograms.empty() ? nullptr : &spectrograms.front(),
                                    rc.das.taps_m.empty() ? 0.0 : rc.das.taps_m.front());
  files.insert(files.end(), plot_files.begin(), plot_files.end());
  update_manifest(root, paths::kProcessManifest, "process", files);
}

void botdr_simulate(const RunConfig& rc, const std::vector<Epoch>& epochs) {
  apply_jobs(rc);
  const fs::path root = root_of(rc);
  const auto grid = rc.botdr_positions();
  auto synth = one_frame_synth(rc, grid);
  const std::vector<double> temperature(grid.count, 0.0);
  // scans are snapshots; stamp them on the wind clock: start of record, wind
  // peak, one day after the peak
  const auto peak = scenario::WindField(rc.scenario.wind).peak_time();
  auto scan_time = [&](Epoch e) {
    switch (e) {
      case Epoch::before:
        return rc.scenario.timeline.to_wind_clock(rc.scenario.timeline.start);
      case Epoch::after:
        return peak;
      case Epoch::relaxed:
        break;
    }
    return core::add_seconds(peak, 86400.0);
  };
  std::vector<std::string> files;
  for (Epoch e : epochs.empty() ? std::vector<Epoch>(std::begin(kEpochs), std::end(kEpochs)) : epochs) {
    log(fmt::format("botdr: spectra for epoch '{}'", scenario::to_string(e)));
    const auto strain = synth.static_profile(e);
    const auto stack = botdr::simulate_spectra(grid, strain, temperature, rc.botdr.instrument,
                                               static_cast<std::uint64_t>(e));
    const std::string rel = fmt::format("botdr/spectra_{}.wf", scenario::to_string(e));
    fs::create_directories((root / rel).parent_path());
    botdr::write_spectrum_stack(root / rel, stack,
                                {{"epoch", scenario::to_string(e)},
                                 {"wind_time", core::format_utc(scan_time(e))},
                                 {"pulse_width_us", rc.botdr.instrument.pulse_width_us},
                                 {"averages", rc.botdr.instrument.averages},
                                 {"resolution_m", rc.botdr.instrument.resolution_m()}});
    files.push_back(rel);
  }
  update_manifest(root, paths::kSimulateManifest, "simulate", files);
}

void botdr_fit(const RunConfig& rc) {
  apply_jobs(rc);
  const fs::path root = root_of(rc);
  std::vector<std::string> files;
  for (Epoch e : kEpochs) {
    const std::string in = fmt::format("botdr/spectra_{}.wf", scenario::to_string(e));
    if (!fs::exists(root / in)) continue;
    log(fmt::format("botdr: fitting epoch '{}'", scenario::to_string(e)));
    const auto stack = botdr::read_spectrum_stack(root / in);
    const auto bfs = botdr::fit_bfs(stack, rc.botdr.instrument);
    const std::string rel = fmt::format("botdr/bfs_{}.csv", scenario::to_string(e));
    botdr::write_bfs_csv(root / rel, bfs);
    files.push_back(rel);
  }
  if (files.empty()) throw ConfigError(fmt::format("no BOTDR spectra under '{}'; run `botdr simulate` first", root.string()));
  update_manifest(root, paths::kProcessManifest, "process", files);
}

void botdr_diff(const RunConfig& rc) {
  const fs::path root = root_of(rc);
  require(root, "botdr/bfs_before.csv", "botdr fit");
  const auto before = botdr::read_bfs_csv(root / "botdr/bfs_before.csv");
  std::vector<std::string> files;
  std::optional<core::Profile> after, relaxed;
  if (fs::exists(root / "botdr/bfs_after.csv")) {
    after = botdr::strain_difference(before, botdr::read_bfs_csv(root / "botdr/bfs_after.csv"), rc.botdr.instrument);
    core::write_profile_csv(root / paths::kBotdrDelta, *after, "delta_ue");
    files.push_back(paths::kBotdrDelta);
  }
  if (fs::exists(root / "botdr/bfs_relaxed.csv")) {
    relaxed = botdr::strain_difference(before, botdr::read_bfs_csv(root / "botdr/bfs_relaxed.csv"), rc.botdr.instrument);
    core::write_profile_csv(root / paths::kBotdrRelaxed, *relaxed, "delta_ue");
    files.push_back(paths::kBotdrRelaxed);
  }
  if (files.empty()) throw ConfigError("botdr diff: needs bfs_after.csv or bfs_relaxed.csv next to bfs_before.csv");
  auto plot_files = write_botdr_plots(root, after ? &*after : nullptr, relaxed ? &*relaxed : nullptr);
  files.insert(files.end(), plot_files.begin(), plot_files.end());
  update_manifest(root, paths::kProcessManifest, "process", files);
}

void sop_simulate(const RunConfig& rc) {
  apply_jobs(rc);
  const fs::path root = root_of(rc);
  const auto pos = rc.sop_field_positions();
  const auto time = rc.sop_field_time();
  log(fmt::format("sop: cascade over {} frames, detection at {} Hz", time.count, rc.sop.instrument.sample_rate_hz));
  scenario::FieldSynthesizer synth(rc.scenario, pos, time);
  const auto plates = sop::plate_layout(rc.scenario, rc.sop.instrument);
  const auto states = sop::propagate_polarization(synth, plates, rc.sop.instrument);
  const auto trace = sop::detect(states, rc.sop.instrument);
  fs::create_directories((root / paths::kSopTrace).parent_path());
  sop::write_sop_trace(root / paths::kSopTrace, trace,
                       {{"n_plates", rc.sop.instrument.n_plates},
                        {"highpass_corner_hz", rc.sop.instrument.highpass_corner_hz},
                        {"pdl_db", rc.sop.instrument.pdl_db}});
  update_manifest(root, paths::kSimulateManifest, "simulate", {paths::kSopTrace});
}

void sop_process(const RunConfig& rc) {
  apply_jobs(rc);
  const fs::path root = root_of(rc);
  require(root, paths::kSopTrace, "sop simulate");
  const auto trace = sop::read_sop_trace(root / paths::kSopTrace);
  const auto s1 = sop::stokes_rms(trace, rc.sop.window_s);
  {
    std::ofstream os(root / paths::kSopS1);
    os << "timestamp,s1_norm,valid\n";
    for (std::size_t k = 0; k < s1.s1_norm.values.size(); ++k) {
      os << core::format_utc(s1.s1_norm.time.at(k)) << ',' << core::format_number(s1.s1_norm.values[k]) << ','
         << static_cast<int>(s1.valid[k]) << '\n';
    }
  }
  const auto spec = sop::sop_spectrogram(trace, stft(rc.sop.stft_window));
  core::write_waterfall(root / paths::kSopSpectrogram, spec, {{"content", "sop_spectrogram"}});

  json summary;
  summary["window_s"] = rc.sop.window_s;
  summary["storm_fluctuation"] = nullptr;
  summary["calm_fluctuation"] = nullptr;
  if (const auto storm = rc.storm_on_sim_clock()) {
    const auto t0 = s1.s1_norm.time.t0;
    const auto t1 = core::add_seconds(s1.s1_norm.time.end(), 1e-6);
    try {
      summary["calm_fluctuation"] = sop::fluctuation_magnitude(s1, t0, std::min(storm->begin, t1));
    } catch (const InvalidArgument&) {
      log("sop: too few pre-storm windows for a calm baseline");
    }
    try {
      summary["storm_fluctuation"] = sop::fluctuation_magnitude(s1, std::max(storm->begin, t0), std::min(storm->end, t1));
    } catch (const InvalidArgument&) {
      log("sop: too few storm windows for a storm fluctuation");
    }
  }
  json tj = json::array();
  for (const auto& t : detect_tones(rc, spec)) tj.push_back(tone_to_json(t));
  summary["tones"] = tj;
  write_json(root / paths::kSopSummary, summary);

  std::vector<std::string> files{paths::kSopS1, paths::kSopSpectrogram, paths::kSopSummary};
  auto plot_files = write_sop_plots(root, s1, spec);
  files.insert(files.end(), plot_files.begin(), plot_files.end());
  update_manifest(root, paths::kProcessManifest, "process", files);
}

void simulate(const RunConfig& rc, std::optional<Modality> only) {
  rc.require_seed();
  const fs::path root = root_of(rc);
  update_manifest(root, paths::kSimulateManifest, "simulate", simulate_field(rc));
  auto run = [&](Modality m) { return rc.enabled(m) && (!only || *only == m); };
  if (run(Modality::das)) das_simulate(rc);
  if (run(Modality::botdr)) botdr_simulate(rc);
  if (run(Modality::sop)) sop_simulate(rc);
}

void process(const RunConfig& rc, std::optional<Modality> only) {
  const fs::path root = root_of(rc);
  require(root, paths::kSimulateManifest, "simulate");
  require(root, paths::kWind, "simulate");
  auto run = [&](Modality m) { return rc.enabled(m) && (!only || *only == m); };
  const auto wind_files = write_wind_plot(root, core::read_series_csv(root / paths::kWind, core::Unit::meters_per_second),
                                          rc.scenario.timeline);
  update_manifest(root, paths::kProcessManifest, "process", wind_files);
  if (run(Modality::das)) das_process(rc);
  if (run(Modality::botdr)) {
    botdr_fit(rc);
    botdr_diff(rc);
  }
  if (run(Modality::sop)) sop_process(rc);
  update_manifest(root, paths::kProcessManifest, "process", {write_plot_manifest(root)});
}

void report(const RunConfig& rc) {
  const fs::path root = root_of(rc);
  analysis::ReportInputs in;
  in.scenario = rc.scenario.name;
  in.options.hot_fraction = rc.analysis.hot_fraction;
  in.options.peak_threshold_ue = rc.analysis.peak_threshold_ue;
  in.options.method = rc.analysis.method;

  if (fs::exists(root / paths::kDasStd)) {
    analysis::DasInputs d;
    d.std_nstrain = core::read_waterfall(root / paths::kDasStd);
    d.wind = analysis::wind_on_sim_clock(rc.scenario, d.std_nstrain.time);
    for (const auto& seg : rc.scenario.segments) d.segments.push_back({seg.name, seg.start_m, seg.end_m});
    if (fs::exists(root / paths::kDasTones)) {
      const json tones = read_json(root / paths::kDasTones);
      for (const auto& t : tones.at("tones")) d.tones.push_back(tone_from_json(t, root / paths::kDasTones));
    }
    in.das = std::move(d);
  }
  if (fs::exists(root / paths::kBotdrDelta)) {
    analysis::BotdrInputs b;
    b.delta_ue = core::read_profile_csv(root / paths::kBotdrDelta, core::Unit::microstrain);
    b.resolution_m = rc.botdr.instrument.resolution_m();
    in.botdr = std::move(b);
  }
  if (fs::exists(root / paths::kSopSummary)) {
    const json s = read_json(root / paths::kSopSummary);
    analysis::SopInputs so;
    for (const auto& t : s.at("tones")) so.tones.push_back(tone_from_json(t, root / paths::kSopSummary));
    if (!s.at("storm_fluctuation").is_null()) so.storm_fluctuation = s.at("storm_fluctuation").get<double>();
    if (!s.at("calm_fluctuation").is_null()) so.calm_fluctuation = s.at("calm_fluctuation").get<double>();
    in.sop = std::move(so);
  }
  if (!in.das && !in.botdr && !in.sop) {
    throw ConfigError(fmt::format("report: no processed modality under '{}'; run `process` first", root.string()));
  }
  const auto r = analysis::build_report(in);
  write_json(root / paths::kReportJson, r.to_json());
  {
    std::ofstream os(root / paths::kReportText);
    os << r.to_text();
  }
  update_manifest(root, paths::kReportManifest, "report", {paths::kReportJson, paths::kReportText});
  std::cout << r.to_text();
}

CouplingSuggestion suggest_coupling(const RunConfig& rc, double lo_m, double hi_m, double target_nstrain) {
  apply_jobs(rc);
  scenario::FieldSynthesizer synth(rc.scenario, rc.das_positions(), rc.das_time());
  const auto truth = scenario::dynamic_block_std(synth, rc.das.block_t, rc.das.block_x);
  CouplingSuggestion s;
  for (std::size_t r = 0; r < truth.rows(); ++r) {
    for (std::size_t c = 0; c < truth.cols(); ++c) {
      const double x = truth.position.at(c);
      if (x < lo_m || x > hi_m) continue;
      if (truth(r, c) > s.current_peak) {
        s.current_peak = truth(r, c);
        s.peak_position_m = x;
      }
    }
  }
  if (!(s.current_peak > 0.0)) throw InvalidArgument("calibrate: no dynamic strain in the requested span");
  s.scale = target_nstrain / s.current_peak;
  return s;
}

}  // namespace fibersense::app
