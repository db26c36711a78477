#include "run_config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/rng.hpp"

namespace fibersense::app {

using nlohmann::json;

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::das:
      return "das";
    case Modality::botdr:
      return "botdr";
    case Modality::sop:
      return "sop";
  }
  return "das";
}

Modality modality_from_string(std::string_view s) {
  if (s == "das") return Modality::das;
  if (s == "botdr") return Modality::botdr;
  if (s == "sop") return Modality::sop;
  throw ConfigError(fmt::format("--modality: unknown modality '{}' (expected das, botdr or sop)", s));
}

namespace {

// Reads `key` from object `j` into `out` when present; the diagnostic names
// the dotted field path.
template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{}: wrong type", where, key));
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(fmt::format("{}: expected an object", key));
  return j.at(key);
}

void positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("{}: must be positive", field));
}

// Instrument validation errors arrive as InvalidArgument; rethrow as config
// errors tagged with the section.
template <typename F>
void validate_section(const std::string& name, F&& f) {
  try {
    f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("{}: {}", name, e.what()));
  }
}

}  // namespace

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return std::filesystem::path(env);
  return std::filesystem::current_path() / "fibersense-out";
}

bool RunConfig::enabled(Modality m) const {
  switch (m) {
    case Modality::das:
      return das.enabled;
    case Modality::botdr:
      return botdr.enabled;
    case Modality::sop:
      return sop.enabled;
  }
  return false;
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("seed: required for simulate (set it in the config or pass --seed)");
  return *seed;
}

core::TimeGrid RunConfig::das_time() const {
  const double n = std::floor(das.duration_s * das.instrument.prf_hz + 1e-9);
  return core::TimeGrid::make(scenario.timeline.start, 1.0 / das.instrument.prf_hz, static_cast<std::size_t>(n));
}

core::PositionGrid RunConfig::das_positions() const {
  return core::PositionGrid::covering(das.start_m, das.end_m, das.instrument.sample_spacing_m);
}

core::PositionGrid RunConfig::botdr_positions() const {
  return core::PositionGrid::covering(0.0, scenario.length_m(), botdr.spacing_m);
}

core::TimeGrid RunConfig::sop_field_time() const {
  const double n = std::floor(sop.duration_s * sop.field_rate_hz + 1e-9);
  return core::TimeGrid::make(scenario.timeline.start, 1.0 / sop.field_rate_hz, static_cast<std::size_t>(n));
}

core::PositionGrid RunConfig::sop_field_positions() const {
  return core::PositionGrid::covering(0.0, scenario.length_m(), sop.field_spacing_m);
}

std::optional<scenario::TimeWindow> RunConfig::storm_on_sim_clock() const {
  if (!scenario.timeline.storm) return std::nullopt;
  return scenario::TimeWindow{scenario.timeline.to_sim_clock(scenario.timeline.storm->begin),
                              scenario.timeline.to_sim_clock(scenario.timeline.storm->end)};
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config: '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  std::string schema;
  read(j, "schema", schema, "config");
  if (schema.empty()) throw ConfigError("config.schema: required field missing");
  if (schema != kRunSchema) {
    throw FormatError(fmt::format("config.schema: expected '{}', found '{}'", kRunSchema, schema));
  }

  RunConfig rc;
  rc.source = path;
  const auto base = path.parent_path();

  std::string scenario_file;
  read(j, "scenario", scenario_file, "config");
  if (scenario_file.empty()) throw ConfigError("config.scenario: required field missing");
  rc.scenario_path = std::filesystem::path(scenario_file).is_relative() ? base / scenario_file : std::filesystem::path(scenario_file);
  if (!std::filesystem::exists(rc.scenario_path)) {
    throw ConfigError(fmt::format("config.scenario: file '{}' does not exist", rc.scenario_path.string()));
  }
  rc.scenario = scenario::load_scenario(rc.scenario_path);

  if (j.contains("seed")) {
    std::uint64_t s = 0;
    read(j, "seed", s, "config");
    rc.seed = s;
  }
  if (ov.seed) rc.seed = ov.seed;
  if (rc.seed) rc.scenario.seed = *rc.seed;
  read(j, "jobs", rc.jobs, "config");
  if (ov.jobs) rc.jobs = *ov.jobs;

  std::string output;
  read(j, "output", output, "config");
  if (ov.output) {
    rc.output = *ov.output;
  } else if (!output.empty()) {
    rc.output = std::filesystem::path(output).is_relative() ? default_output_root() / output : std::filesystem::path(output);
  } else {
    rc.output = default_output_root() / rc.scenario.name;
  }

  const auto& noise = rc.scenario.noise;

  const json& d = section(j, "das");
  DasRun& das = rc.das;
  das.instrument.phase_noise_std_rad = noise.das_phase_noise_rad;
  read(d, "enabled", das.enabled, "das");
  read(d, "start_m", das.start_m, "das");
  read(d, "end_m", das.end_m, "das");
  read(d, "duration_s", das.duration_s, "das");
  read(d, "block_t", das.block_t, "das");
  read(d, "block_x", das.block_x, "das");
  read(d, "store_phase", das.store_phase, "das");
  read(d, "taps_m", das.taps_m, "das");
  read(d, "localize_hz", das.localize_hz, "das");
  read(d, "gauge_length_m", das.instrument.gauge_length_m, "das");
  read(d, "prf_hz", das.instrument.prf_hz, "das");
  read(d, "spacing_m", das.instrument.sample_spacing_m, "das");
  read(d, "pulse_width_ns", das.instrument.pulse_width_ns, "das");
  read(d, "phase_noise_std_rad", das.instrument.phase_noise_std_rad, "das");
  if (ov.block_t) das.block_t = *ov.block_t;
  if (ov.block_x) das.block_x = *ov.block_x;

  const json& b = section(j, "botdr");
  BotdrRun& bo = rc.botdr;
  bo.instrument.single_shot_noise_std = noise.botdr_single_shot_noise;
  read(b, "enabled", bo.enabled, "botdr");
  read(b, "spacing_m", bo.spacing_m, "botdr");
  read(b, "pulse_width_us", bo.instrument.pulse_width_us, "botdr");
  read(b, "averages", bo.instrument.averages, "botdr");
  read(b, "linewidth_hz", bo.instrument.linewidth_hz, "botdr");
  read(b, "scan_start_hz", bo.instrument.scan_start_hz, "botdr");
  read(b, "scan_stop_hz", bo.instrument.scan_stop_hz, "botdr");
  read(b, "scan_step_hz", bo.instrument.scan_step_hz, "botdr");
  read(b, "single_shot_noise_std", bo.instrument.single_shot_noise_std, "botdr");

  const json& s = section(j, "sop");
  SopRun& sop = rc.sop;
  sop.instrument.detector_noise_std = noise.sop_detector_noise;
  read(s, "enabled", sop.enabled, "sop");
  read(s, "duration_s", sop.duration_s, "sop");
  read(s, "field_rate_hz", sop.field_rate_hz, "sop");
  read(s, "field_spacing_m", sop.field_spacing_m, "sop");
  read(s, "window_s", sop.window_s, "sop");
  read(s, "stft_window", sop.stft_window, "sop");
  read(s, "sample_rate_hz", sop.instrument.sample_rate_hz, "sop");
  read(s, "highpass_corner_hz", sop.instrument.highpass_corner_hz, "sop");
  read(s, "n_plates", sop.instrument.n_plates, "sop");
  read(s, "strain_to_retardance", sop.instrument.strain_to_retardance, "sop");
  read(s, "rotation_drift_rad_s", sop.instrument.rotation_drift_rad_s, "sop");
  read(s, "detector_noise_std", sop.instrument.detector_noise_std, "sop");
  read(s, "pdl_db", sop.instrument.pdl_db, "sop");
  if (ov.window_s) sop.window_s = *ov.window_s;

  const json& a = section(j, "analysis");
  AnalysisRun& an = rc.analysis;
  std::string method = std::string(analysis::to_string(an.method));
  read(a, "correlation", method, "analysis");
  an.method = analysis::correlation_method_from_string(method);
  read(a, "hot_fraction", an.hot_fraction, "analysis");
  read(a, "peak_threshold_ue", an.peak_threshold_ue, "analysis");
  read(a, "prominence_db", an.prominence_db, "analysis");
  if (a.contains("tone_band_hz")) {
    std::vector<double> band;
    read(a, "tone_band_hz", band, "analysis");
    if (band.size() != 2 || !(band[0] < band[1])) throw ConfigError("analysis.tone_band_hz: expected [low, high]");
    an.tone_lo_hz = band[0];
    an.tone_hi_hz = band[1];
  }
  read(a, "das_stft_window", an.das_stft_window, "analysis");

  // Per-modality streams all hang off the run seed.
  const std::uint64_t seed = rc.seed.value_or(rc.scenario.seed);
  das.instrument.seed = core::derive_seed(seed, "run-das");
  bo.instrument.seed = core::derive_seed(seed, "run-botdr");
  sop.instrument.seed = core::derive_seed(seed, "run-sop");

  if (!das.enabled && !bo.enabled && !sop.enabled) throw ConfigError("config: every modality is disabled");
  const double length = rc.scenario.length_m();
  if (das.enabled) {
    positive(das.duration_s, "das.duration_s");
    if (!(das.start_m >= 0.0 && das.end_m > das.start_m && das.end_m <= length)) {
      throw ConfigError(fmt::format("das.end_m: range [{}, {}] m must lie inside the cable (0 .. {} m)", das.start_m,
                                    das.end_m, length));
    }
    if (das.block_t < 1) throw ConfigError("das.block_t: must be at least 1");
    if (das.block_x < 1) throw ConfigError("das.block_x: must be at least 1");
    validate_section("das", [&] { das.instrument.validate(); });
    if (das.block_t > rc.das_time().count) throw ConfigError("das.block_t: longer than the record");
    if (das.taps_m.empty()) {
      for (const auto& seg : rc.scenario.segments) {
        const double mid = 0.5 * (seg.start_m + seg.end_m);
        if (seg.oscillation && mid >= das.start_m && mid <= das.end_m) das.taps_m.push_back(mid);
      }
    }
    if (das.localize_hz.empty()) {
      for (const auto& seg : rc.scenario.segments) {
        if (seg.oscillation) das.localize_hz.push_back(seg.oscillation->freq_hz);
      }
    }
    for (double x : das.taps_m) {
      if (x < das.start_m || x > das.end_m) throw ConfigError(fmt::format("das.taps_m: {} m is outside the DAS range", x));
    }
    for (double f : das.localize_hz) {
      if (!(f > 0.0 && f < 0.5 * das.instrument.prf_hz)) {
        throw ConfigError(fmt::format("das.localize_hz: {} Hz is not below Nyquist", f));
      }
    }
  }
  if (bo.enabled) {
    positive(bo.spacing_m, "botdr.spacing_m");
    validate_section("botdr", [&] { bo.instrument.validate(); });
  }
  if (sop.enabled) {
    positive(sop.duration_s, "sop.duration_s");
    positive(sop.field_rate_hz, "sop.field_rate_hz");
    positive(sop.field_spacing_m, "sop.field_spacing_m");
    positive(sop.window_s, "sop.window_s");
    validate_section("sop", [&] { sop.instrument.validate(); });
    if (sop.instrument.sample_rate_hz < sop.field_rate_hz) {
      throw ConfigError("sop.sample_rate_hz: must not be below sop.field_rate_hz");
    }
    if (sop.stft_window < 16) throw ConfigError("sop.stft_window: must be at least 16");
  }
  if (!(an.hot_fraction > 0.0 && an.hot_fraction <= 1.0)) throw ConfigError("analysis.hot_fraction: must lie in (0, 1]");
  positive(an.prominence_db, "analysis.prominence_db");
  if (an.das_stft_window < 16) throw ConfigError("analysis.das_stft_window: must be at least 16");
  return rc;
}

}  // namespace fibersense::app
