#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fibersense/core/filters.hpp"
#include "fibersense/core/io.hpp"
#include "fibersense/core/stats.hpp"
#include "fibersense/das/das.hpp"
#include "fibersense/scenario/field.hpp"

namespace fibersense::das {

/// Narrowband power per channel over a frame range (Goertzel), in squared
/// input units: a sine of amplitude a contributes a^2 / 2.
class ToneLocalizer {
 public:
  ToneLocalizer(std::size_t channels, double freq_hz, double rate_hz, std::size_t first_frame,
                std::size_t frame_count);
  /// Rows starting at absolute frame `frame`; rows outside the range are ignored.
  void push(std::size_t frame, std::span<const float> rows);
  bool complete() const { return seen_ == count_; }
  std::vector<double> power() const;
  double freq_hz() const { return freq_hz_; }
  std::size_t first_frame() const { return first_; }
  std::size_t frame_count() const { return count_; }

 private:
  std::size_t channels_;
  double freq_hz_;
  std::size_t first_;
  std::size_t count_;
  std::size_t seen_ = 0;
  std::vector<core::Goertzel> bins_;
};

struct ToneRequest {
  double freq_hz = 0.0;
  std::size_t first_frame = 0;
  std::size_t frame_count = 0;
};

struct DasStreamOptions {
  std::size_t block_t = 600;
  std::size_t block_x = 1;
  /// Frames pulled per step; affects memory only, never the results.
  std::size_t chunk_frames = 600;
  /// Also reduce the noiseless ground-truth field (simulation runs only).
  bool truth_std = false;
  std::vector<double> tap_positions_m;
  std::vector<ToneRequest> tones;
};

struct DasStreamResult {
  core::Waterfall std_nstrain;
  std::optional<core::Waterfall> truth_std_nstrain;
  /// Recovered strain at each tap position (nearest channel), nanostrain.
  std::vector<core::Series> taps;
  /// Band power per channel for each tone request (nanostrain squared).
  std::vector<core::Profile> tone_power;
};

/// Consumes wrapped phase rows in time order and builds the processed
/// products without holding the record in memory.
class DasProcessor {
 public:
  DasProcessor(const core::PositionGrid& position, const core::TimeGrid& time, const DasConfig& cfg,
               const DasStreamOptions& opt);
  void push_phase(std::span<const float> rows);
  DasStreamResult finish();

 private:
  core::PositionGrid position_;
  core::TimeGrid time_;
  DasStreamOptions opt_;
  StrainRecovery recovery_;
  core::BlockStdAccumulator std_;
  std::vector<std::size_t> tap_channels_;
  std::vector<std::vector<double>> taps_;
  std::vector<ToneLocalizer> tones_;
  std::vector<float> strain_;
  std::size_t frame_ = 0;
};

/// Field synthesis, forward model and processing in one streaming pass. When
/// `phase_sink` is given the wrapped phase record is also written to it.
DasStreamResult run_das_stream(scenario::FieldSynthesizer& synth, const DasConfig& cfg,
                               const DasStreamOptions& opt, core::ArrayWriter* phase_sink = nullptr);

/// Processes a phase record file written by run_das_stream or simulate.
DasStreamResult process_phase_file(core::ArrayReader& reader, const DasConfig& cfg, const DasStreamOptions& opt);

/// Array header for a phase record of the given grids.
core::ArrayHeader phase_header(const core::PositionGrid& position, const core::TimeGrid& time,
                               const DasConfig& cfg);
/// Reads the DAS settings stored in a phase record header.
DasConfig config_from_header(const core::ArrayHeader& header);

}  // namespace fibersense::das
