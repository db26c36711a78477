#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibersense/analysis/analysis.hpp"

namespace fibersense::analysis {

struct NamedSpan {
  std::string name;
  double start_m = 0.0;
  double end_m = 0.0;
};

struct DasInputs {
  core::Waterfall std_nstrain;
  /// Wind on the simulation clock; enables the correlation section.
  std::optional<core::Series> wind;
  std::vector<NamedSpan> segments;
  std::vector<ToneDetection> tones;
};

struct BotdrInputs {
  core::Profile delta_ue;
  double resolution_m = 0.0;
};

struct SopInputs {
  std::vector<ToneDetection> tones;
  std::optional<double> storm_fluctuation;
  std::optional<double> calm_fluctuation;
};

struct ReportOptions {
  double hot_fraction = 0.25;
  double peak_threshold_ue = 30.0;
  CorrelationMethod method = CorrelationMethod::pearson;
};

struct ReportInputs {
  std::string scenario;
  std::optional<DasInputs> das;
  std::optional<BotdrInputs> botdr;
  std::optional<SopInputs> sop;
  ReportOptions options;
};

struct SegmentCorrelation {
  NamedSpan segment;
  double r = 0.0;
};

/// A strain-change peak and its nearest DAS hot span.
struct PeakColocation {
  StrainPeak peak;
  bool colocated = false;
  std::optional<std::size_t> hot_span;
  double distance_m = 0.0;
};

/// A DAS hot span and whether a strain-change peak lies within tolerance.
struct HotSpanStatus {
  HotSpan span;
  bool static_feature = false;
};

struct CrossModalReport {
  std::string scenario;
  bool das_present = false;
  bool botdr_present = false;
  bool sop_present = false;
  CorrelationMethod method = CorrelationMethod::pearson;
  double colocation_tolerance_m = 0.0;
  std::vector<SegmentCorrelation> correlations;
  std::vector<HotSpanStatus> hot_spans;
  std::vector<PeakColocation> strain_peaks;
  std::vector<ToneDetection> das_tones;
  std::vector<ToneDetection> sop_tones;
  std::optional<double> sop_storm_fluctuation;
  std::optional<double> sop_calm_fluctuation;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Assembles the cross-modal report. Requires at least one modality; DAS and
/// BOTDR position grids must lie on a common lattice.
CrossModalReport build_report(const ReportInputs& in);

}  // namespace fibersense::analysis
