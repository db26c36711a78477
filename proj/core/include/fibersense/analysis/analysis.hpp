#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fibersense/core/types.hpp"
#include "fibersense/das/das.hpp"
#include "fibersense/scenario/scenario.hpp"

namespace fibersense::analysis {

enum class CorrelationMethod { pearson, spearman };

std::string_view to_string(CorrelationMethod m);
CorrelationMethod correlation_method_from_string(std::string_view s);

/// Fused wind sampled at the wind-clock times of a simulation grid, stamped
/// with the simulation times.
core::Series wind_on_sim_clock(const scenario::Scenario& sc, const core::TimeGrid& sim_grid);

/// Mean over the columns in [start_m, end_m] of each row.
core::Series segment_mean(const core::Waterfall& w, double start_m, double end_m);

/// Correlation between wind and the segment-mean DAS std. The finer of the
/// two series is linearly interpolated onto the coarser grid's samples that
/// fall inside its span; fewer than three common samples is an error.
double correlate_wind_activity(const core::Series& wind, const core::Waterfall& das_std, double start_m,
                               double end_m, CorrelationMethod method = CorrelationMethod::pearson);

struct ToneDetection {
  double freq_hz = 0.0;
  core::UtcTime begin{};
  core::UtcTime end{};
  std::optional<double> position_m;
  double prominence_db = 0.0;
};

struct ToneSearchOptions {
  /// Spectrogram rows averaged; defaults to all.
  std::size_t row_begin = 0;
  std::size_t row_end = std::numeric_limits<std::size_t>::max();
  /// The floor is the median over the band widened by this much on each side;
  /// negative selects twice the band width.
  double floor_margin_hz = -1.0;
};

/// Local maxima of the time-averaged power inside [lo_hz, hi_hz] that stand
/// at least prominence_db above the median floor around the band.
std::vector<ToneDetection> find_tones(const core::Waterfall& spectrogram, double lo_hz, double hi_hz,
                                      double prominence_db = 6.0, const ToneSearchOptions& opt = {});

/// Narrowband power per position at freq_hz over frames
/// [first_frame, first_frame + frame_count) of a phase record, in
/// nanostrain squared (a tone of amplitude a gives a^2 / 2).
core::Profile localize_tone(const das::PhaseRecord& record, const das::DasConfig& cfg, double freq_hz,
                            std::size_t first_frame = 0,
                            std::size_t frame_count = std::numeric_limits<std::size_t>::max());

/// Contiguous run of positions whose peak std reaches the hot threshold.
struct HotSpan {
  double start_m = 0.0;
  double end_m = 0.0;
  double peak_position_m = 0.0;
  double peak_value = 0.0;
  core::UtcTime peak_time{};
};

/// Columns whose maximum over rows is at least hot_fraction of the global
/// maximum, grouped into contiguous spans (edges at half a spacing).
std::vector<HotSpan> hot_spans(const core::Waterfall& das_std, double hot_fraction = 0.25);

struct StrainPeak {
  double position_m = 0.0;
  double value = 0.0;
  double start_m = 0.0;
  double end_m = 0.0;
};

/// Maxima of contiguous valid regions at or above threshold.
std::vector<StrainPeak> strain_peaks(const core::Profile& delta, double threshold);

/// True when the sample positions of both grids lie on one lattice: their
/// spacings are integer multiples and their origins differ by a whole
/// number of the finer spacing.
bool grids_consistent(const core::PositionGrid& a, const core::PositionGrid& b);

}  // namespace fibersense::analysis
