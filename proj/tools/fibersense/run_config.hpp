#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibersense/analysis/analysis.hpp"
#include "fibersense/botdr/botdr.hpp"
#include "fibersense/das/das.hpp"
#include "fibersense/scenario/field.hpp"
#include "fibersense/sop/sop.hpp"

namespace fibersense::app {

inline constexpr const char* kRunSchema = "run1";
inline constexpr const char* kOutputRootEnv = "FIBERSENSE_OUTPUT_ROOT";

enum class Modality { das, botdr, sop };
std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view s);

struct DasRun {
  bool enabled = true;
  double start_m = 0.0;
  double end_m = 20000.0;
  double duration_s = 1800.0;
  std::size_t block_t = 6000;
  std::size_t block_x = 1;
  /// Keep the wrapped phase record on disk. Off for desk-scale runs, where
  /// the record is regenerated from the seed while processing.
  bool store_phase = false;
  /// Recovered-strain taps; empty selects the centre of every segment that
  /// carries an oscillation.
  std::vector<double> taps_m;
  /// Frequencies localized along the fiber before and during the storm.
  std::vector<double> localize_hz;
  das::DasConfig instrument;
};

struct BotdrRun {
  bool enabled = true;
  double spacing_m = 10.0;
  botdr::BotdrConfig instrument;
};

struct SopRun {
  bool enabled = true;
  double duration_s = 1800.0;
  /// Grid on which the strain field is synthesized before the cascade.
  double field_rate_hz = 600.0;
  double field_spacing_m = 10.0;
  double window_s = 1.0;
  std::size_t stft_window = 16384;
  sop::SopConfig instrument;
};

struct AnalysisRun {
  analysis::CorrelationMethod method = analysis::CorrelationMethod::pearson;
  double hot_fraction = 0.25;
  double peak_threshold_ue = 30.0;
  double prominence_db = 6.0;
  double tone_lo_hz = 2.0;
  double tone_hi_hz = 2.6;
  std::size_t das_stft_window = 4096;
};

struct RunConfig {
  std::filesystem::path source;
  std::filesystem::path scenario_path;
  scenario::Scenario scenario;
  std::filesystem::path output;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  DasRun das;
  BotdrRun botdr;
  SopRun sop;
  AnalysisRun analysis;

  bool enabled(Modality m) const;
  std::uint64_t require_seed() const;

  core::TimeGrid das_time() const;
  core::PositionGrid das_positions() const;
  core::PositionGrid botdr_positions() const;
  core::TimeGrid sop_field_time() const;
  core::PositionGrid sop_field_positions() const;
  /// Storm window on the simulation clock, if the scenario has one.
  std::optional<scenario::TimeWindow> storm_on_sim_clock() const;
};

/// Scalar overrides given on the command line.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> block_t;
  std::optional<std::size_t> block_x;
  std::optional<double> window_s;
};

/// Loads and validates a run config; ConfigError names the offending field.
/// Relative paths resolve against the config file's directory, except the
/// output directory, which resolves against the output root.
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& ov = {});

/// Directory outputs go to when neither the flag nor the config gives one.
std::filesystem::path default_output_root();

}  // namespace fibersense::app
