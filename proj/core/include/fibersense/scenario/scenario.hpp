#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibersense/core/time.hpp"
#include "fibersense/scenario/wind.hpp"

namespace fibersense::scenario {

inline constexpr const char* kScenarioSchema = "scn1";

enum class SegmentKind { onshore, fjord, transition, offshore };

std::string_view to_string(SegmentKind k);
SegmentKind segment_kind_from_string(std::string_view s);

struct TimeWindow {
  core::UtcTime begin{};
  core::UtcTime end{};
  bool contains(core::UtcTime t) const { return t >= begin && t < end; }
};

/// Narrowband standing-wave oscillation injected on a segment. The window is
/// on the wind clock; no window means always active.
struct Oscillation {
  double freq_hz = 0.0;
  double amplitude_nstrain = 0.0;
  std::optional<TimeWindow> active_window;
};

struct CableSegment {
  std::string name;
  double start_m = 0.0;
  double end_m = 0.0;
  SegmentKind kind = SegmentKind::offshore;
  /// Dynamic strain std (nanostrain) per m/s of wind above the calm threshold.
  double coupling = 0.0;
  /// Static strain offset (microstrain) per m/s of peak wind above the calm threshold.
  double static_gain = 0.0;
  std::optional<Oscillation> oscillation;

  double length_m() const { return end_m - start_m; }
  bool contains(double x_m) const { return x_m >= start_m && x_m < end_m; }
};

/// Maps simulation time onto the wind record. A simulated second spans
/// `compression` seconds of wind, so a multi-day storm fits a desk-scale run.
struct Timeline {
  core::UtcTime start{};
  double compression = 1.0;
  /// Storm window on the wind clock.
  std::optional<TimeWindow> storm;

  core::UtcTime to_wind_clock(core::UtcTime sim) const;
  core::UtcTime to_sim_clock(core::UtcTime wind) const;
};

struct ForcingModel {
  double calm_threshold_mps = 3.0;
  double band_low_hz = 0.05;
  double band_high_hz = 5.0;
  /// Spacing of the independent noise processes the dynamic field is
  /// interpolated from; sets the spatial correlation length.
  double correlation_length_m = 1000.0;
  /// Fraction of the storm static offset released in the relaxed epoch.
  double relaxation = 0.9;
  /// Filter settling time discarded before the first frame.
  double warmup_s = 200.0;
};

struct NoiseLevels {
  double das_phase_noise_rad = 0.0;
  double botdr_single_shot_noise = 0.0;
  double sop_detector_noise = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  std::vector<CableSegment> segments;
  std::vector<WindSeries> wind;
  Timeline timeline;
  ForcingModel forcing;
  NoiseLevels noise;
  std::uint64_t seed = 0;

  double length_m() const { return segments.empty() ? 0.0 : segments.back().end_m; }
  /// Index of the segment containing x; the cable end belongs to the last segment.
  std::size_t segment_index(double x_m) const;
  const CableSegment* find_segment(std::string_view name) const;
  /// Tiling, finiteness and wind checks; throws ConfigError naming the field.
  void validate() const;
};

/// Loads a scenario config. Relative wind CSV paths resolve against the
/// config file's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

}  // namespace fibersense::scenario
