#pragma once

#include <optional>
#include <vector>

#include "run_config.hpp"

namespace fibersense::app {

// Output layout, relative to the run's output directory.
namespace paths {
inline constexpr const char* kSimulateManifest = "manifest.simulate.json";
inline constexpr const char* kProcessManifest = "manifest.process.json";
inline constexpr const char* kReportManifest = "manifest.report.json";
inline constexpr const char* kWind = "field/wind_sim.csv";
inline constexpr const char* kTruthStd = "field/truth_std.wf";
inline constexpr const char* kPhase = "das/phase.wf";
inline constexpr const char* kDasStd = "das/std.wf";
inline constexpr const char* kDasTones = "das/tones.json";
inline constexpr const char* kDasTonePower = "das/tone_power.csv";
inline constexpr const char* kBotdrDelta = "botdr/delta_after.csv";
inline constexpr const char* kBotdrRelaxed = "botdr/delta_relaxed.csv";
inline constexpr const char* kSopTrace = "sop/trace.wf";
inline constexpr const char* kSopS1 = "sop/s1_norm.csv";
inline constexpr const char* kSopSpectrogram = "sop/spectrogram.wf";
inline constexpr const char* kSopSummary = "sop/summary.json";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
}  // namespace paths

/// Writes the scenario products shared by all modalities plus each enabled
/// modality's raw data (restricted to `only` when given).
void simulate(const RunConfig& rc, std::optional<Modality> only = std::nullopt);
/// Derived products and plot tables for each enabled modality.
void process(const RunConfig& rc, std::optional<Modality> only = std::nullopt);
/// Cross-modal report from whatever has been processed.
void report(const RunConfig& rc);

void das_simulate(const RunConfig& rc);
void das_process(const RunConfig& rc);

/// Spectra for the given epochs (all three when empty).
void botdr_simulate(const RunConfig& rc, const std::vector<scenario::Epoch>& epochs = {});
void botdr_fit(const RunConfig& rc);
void botdr_diff(const RunConfig& rc);

void sop_simulate(const RunConfig& rc);
void sop_process(const RunConfig& rc);

/// Suggested coupling scale for the segments in [lo_m, hi_m] so that the
/// noiseless DAS std peaks at target_nstrain there; also prints where the
/// current peak sits.
struct CouplingSuggestion {
  double current_peak = 0.0;
  double peak_position_m = 0.0;
  double scale = 1.0;
};
CouplingSuggestion suggest_coupling(const RunConfig& rc, double lo_m, double hi_m, double target_nstrain);

}  // namespace fibersense::app
