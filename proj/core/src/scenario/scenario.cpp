#include "fibersense/scenario/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::scenario {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<SegmentKind, std::string_view>, 4> kKinds{{
    {SegmentKind::onshore, "onshore"},
    {SegmentKind::fjord, "fjord"},
    {SegmentKind::transition, "transition"},
    {SegmentKind::offshore, "offshore"},
}};

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{}: wrong type", where, key));
  }
}

template <typename T>
T get_required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(fmt::format("{}.{}: required field missing", where, key));
  return get_or<T>(j, key, T{}, where);
}

core::UtcTime get_time(const json& j, const char* key, const std::string& where) {
  const auto text = get_required<std::string>(j, key, where);
  try {
    return core::parse_utc(text);
  } catch (const FormatError& e) {
    throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

TimeWindow parse_window(const json& j, const std::string& where) {
  return TimeWindow{get_time(j, "begin", where), get_time(j, "end", where)};
}

}  // namespace

std::string_view to_string(SegmentKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "offshore";
}

SegmentKind segment_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKinds) {
    if (name == s) return kind;
  }
  throw ConfigError(fmt::format("unknown segment kind '{}'", s));
}

core::UtcTime Timeline::to_wind_clock(core::UtcTime sim) const {
  return core::add_seconds(start, core::seconds_between(start, sim) * compression);
}

core::UtcTime Timeline::to_sim_clock(core::UtcTime wind) const {
  return core::add_seconds(start, core::seconds_between(start, wind) / compression);
}

std::size_t Scenario::segment_index(double x_m) const {
  if (segments.empty() || x_m < 0.0 || x_m > length_m()) {
    throw InvalidArgument(fmt::format("position {} m is outside the cable [0, {}] m", x_m, length_m()));
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].contains(x_m)) return i;
  }
  return segments.size() - 1;
}

const CableSegment* Scenario::find_segment(std::string_view name) const {
  for (const auto& s : segments) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

void Scenario::validate() const {
  if (segments.empty()) throw ConfigError("segments: at least one segment is required");
  double expect = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const std::string where = fmt::format("segments[{}] ('{}')", i, s.name);
    if (std::abs(s.start_m - expect) > 1e-6) {
      throw ConfigError(fmt::format("{}.start_m: {} leaves a gap or overlap (expected {})", where, s.start_m, expect));
    }
    if (!(s.end_m > s.start_m) || !std::isfinite(s.end_m)) {
      throw ConfigError(fmt::format("{}.end_m: must exceed start_m", where));
    }
    if (!std::isfinite(s.coupling) || s.coupling < 0.0) {
      throw ConfigError(fmt::format("{}.coupling: must be finite and non-negative", where));
    }
    if (!std::isfinite(s.static_gain)) throw ConfigError(fmt::format("{}.static_gain: must be finite", where));
    if (s.oscillation && (!(s.oscillation->freq_hz > 0.0) || !std::isfinite(s.oscillation->amplitude_nstrain))) {
      throw ConfigError(fmt::format("{}.oscillation: frequency must be positive", where));
    }
    expect = s.end_m;
  }
  if (!(length_m() > 0.0)) throw ConfigError("segments: total length must be positive");
  if (wind.empty()) throw ConfigError("wind: at least one station is required");
  if (!(timeline.compression > 0.0)) throw ConfigError("timeline.compression: must be positive");
  if (!(forcing.correlation_length_m > 0.0)) throw ConfigError("forcing.correlation_length_m: must be positive");
  if (forcing.band_low_hz < 0.0 || !(forcing.band_high_hz > forcing.band_low_hz)) {
    throw ConfigError("forcing.band_hz: need 0 <= low < high");
  }
  if (forcing.relaxation < 0.0 || forcing.relaxation > 1.0) {
    throw ConfigError("forcing.relaxation: must lie in [0, 1]");
  }
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string schema = get_required<std::string>(j, "schema", "scenario");
  if (schema != kScenarioSchema) {
    throw FormatError(fmt::format("scenario schema version mismatch: expected '{}', found '{}'", kScenarioSchema, schema));
  }
  Scenario sc;
  sc.name = get_or<std::string>(j, "name", "scenario", "scenario");
  sc.seed = get_or<std::uint64_t>(j, "seed", 0, "scenario");

  std::vector<std::filesystem::path> wind_files;
  if (!j.contains("wind_csv")) throw ConfigError("scenario.wind_csv: required field missing");
  const json& wc = j.at("wind_csv");
  auto add_wind = [&](const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative()) path = base_dir / path;
    if (!std::filesystem::exists(path)) {
      throw ConfigError(fmt::format("scenario.wind_csv: file '{}' does not exist", path.string()));
    }
    wind_files.push_back(path);
  };
  if (wc.is_string()) {
    add_wind(wc.get<std::string>());
  } else if (wc.is_array()) {
    for (const auto& p : wc) add_wind(p.get<std::string>());
  } else {
    throw ConfigError("scenario.wind_csv: expected a path or list of paths");
  }
  sc.wind = ingest_wind(wind_files);

  if (j.contains("timeline")) {
    const json& t = j.at("timeline");
    sc.timeline.start = get_time(t, "start", "timeline");
    sc.timeline.compression = get_or<double>(t, "compression", 1.0, "timeline");
    if (t.contains("storm")) sc.timeline.storm = parse_window(t.at("storm"), "timeline.storm");
  } else {
    sc.timeline.start = sc.wind.front().begin();
  }

  if (j.contains("forcing")) {
    const json& f = j.at("forcing");
    sc.forcing.calm_threshold_mps = get_or<double>(f, "calm_threshold_mps", sc.forcing.calm_threshold_mps, "forcing");
    if (f.contains("band_hz")) {
      const auto band = get_or<std::vector<double>>(f, "band_hz", {}, "forcing");
      if (band.size() != 2) throw ConfigError("forcing.band_hz: expected [low, high]");
      sc.forcing.band_low_hz = band[0];
      sc.forcing.band_high_hz = band[1];
    }
    sc.forcing.correlation_length_m =
        get_or<double>(f, "correlation_length_m", sc.forcing.correlation_length_m, "forcing");
    sc.forcing.relaxation = get_or<double>(f, "relaxation", sc.forcing.relaxation, "forcing");
    sc.forcing.warmup_s = get_or<double>(f, "warmup_s", sc.forcing.warmup_s, "forcing");
  }

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    sc.noise.das_phase_noise_rad = get_or<double>(n, "das_phase_noise_rad", 0.0, "noise");
    sc.noise.botdr_single_shot_noise = get_or<double>(n, "botdr_single_shot_noise", 0.0, "noise");
    sc.noise.sop_detector_noise = get_or<double>(n, "sop_detector_noise", 0.0, "noise");
  }

  if (!j.contains("segments") || !j.at("segments").is_array()) {
    throw ConfigError("scenario.segments: required list missing");
  }
  std::size_t idx = 0;
  for (const auto& s : j.at("segments")) {
    const std::string where = fmt::format("segments[{}]", idx++);
    CableSegment seg;
    seg.name = get_or<std::string>(s, "name", where, where);
    seg.start_m = get_required<double>(s, "start_m", where);
    seg.end_m = get_required<double>(s, "end_m", where);
    seg.kind = segment_kind_from_string(get_required<std::string>(s, "kind", where));
    seg.coupling = get_or<double>(s, "coupling", 0.0, where);
    seg.static_gain = get_or<double>(s, "static_gain", 0.0, where);
    if (s.contains("oscillation")) {
      const json& o = s.at("oscillation");
      const std::string ow = where + ".oscillation";
      Oscillation osc;
      osc.freq_hz = get_required<double>(o, "freq_hz", ow);
      osc.amplitude_nstrain = get_required<double>(o, "amplitude_nstrain", ow);
      if (o.contains("active")) {
        const json& a = o.at("active");
        if (a.is_string() && a.get<std::string>() == "storm") {
          if (!sc.timeline.storm) throw ConfigError(ow + ".active: 'storm' needs timeline.storm");
          osc.active_window = sc.timeline.storm;
        } else if (a.is_object()) {
          osc.active_window = parse_window(a, ow + ".active");
        } else if (!(a.is_string() && a.get<std::string>() == "always")) {
          throw ConfigError(ow + ".active: expected 'always', 'storm' or {begin, end}");
        }
      }
      seg.oscillation = osc;
    }
    sc.segments.push_back(std::move(seg));
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(fmt::format("scenario file '{}' cannot be opened", path.string()));
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("scenario file '{}': {}", path.string(), e.what()));
  }
  return scenario_from_json(j, path.parent_path());
}

}  // namespace fibersense::scenario
