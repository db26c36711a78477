#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fibersense/core/filters.hpp"
#include "fibersense/core/rng.hpp"
#include "fibersense/core/types.hpp"
#include "fibersense/scenario/scenario.hpp"

namespace fibersense::scenario {

/// BOTDR measurement epochs: pre-storm baseline, storm-loaded, and after the
/// storm once most of the static offset has relaxed.
enum class Epoch { before, after, relaxed };

std::string_view to_string(Epoch e);
Epoch epoch_from_string(std::string_view s);

/// Ground-truth strain sensed by every modality.
struct StrainField {
  core::PositionGrid position;
  core::TimeGrid time;
  /// Dynamic strain in nanostrain, row-major [time x position].
  std::vector<float> dynamic_nstrain;
  /// Static strain profiles in microstrain.
  std::vector<double> static_before_ue;
  std::vector<double> static_after_ue;
  std::vector<double> static_relaxed_ue;
  /// Temperature change in kelvin (zero unless set).
  std::vector<double> temperature_delta_k;

  float dynamic(std::size_t t, std::size_t x) const { return dynamic_nstrain[t * position.count + x]; }
  const std::vector<double>& static_profile(Epoch e) const;
  core::Waterfall dynamic_waterfall() const;
  void validate() const;
};

/// Cable interval [start_m, end_m) used to aggregate strain (a SOP plate).
struct Span {
  double start_m = 0.0;
  double end_m = 0.0;
};

/// Grid positions inside each span: [start, end), with the last span closed at
/// its end; a span holding no position takes the one nearest its midpoint.
std::vector<std::vector<std::size_t>> span_members(const core::PositionGrid& grid, const std::vector<Span>& spans);

/// Streaming, deterministic generator of the dynamic strain field.
///
/// The field is
///
///   dynamic(x, t) = coupling(x) * max(wind(t) - calm, 0) * n(x, t) + tone(x, t)
///
/// where n is unit-variance band-limited Gaussian noise. n is interpolated
/// between independent processes pinned every correlation_length_m along the
/// cable, with weights normalized to keep unit variance. Each pinned process
/// draws from its own sub-seeded stream, so a position's values depend only on
/// the seed, the position and the time grid, never on the grid's extent or
/// the block sizes used to pull frames.
class FieldSynthesizer {
 public:
  FieldSynthesizer(const Scenario& sc, core::PositionGrid position, core::TimeGrid time);

  const core::PositionGrid& position() const { return position_; }
  const core::TimeGrid& time() const { return time_; }
  std::size_t frames_emitted() const { return frame_; }
  std::size_t frames_remaining() const { return time_.count - frame_; }

  /// Next n frames in nanostrain, row-major [n x positions].
  void next_block(std::size_t n, std::span<float> out);

  /// Restricts span-mean output to these spans (mean over the grid positions
  /// inside each span, or the nearest position if none fall inside).
  void set_spans(const std::vector<Span>& spans);
  /// Next n frames of per-span mean dynamic strain, row-major [n x spans].
  /// Equal to averaging next_block output over each span, without building it.
  void next_span_means(std::size_t n, std::span<double> out);

  std::vector<double> static_profile(Epoch e) const;
  /// Forcing envelope max(wind - calm, 0) for frames [first, first + n).
  std::vector<double> envelope(std::size_t first, std::size_t n) const;

 private:
  struct Node {
    core::Rng rng;
    core::Biquad highpass;
    core::Biquad lowpass;
    bool use_highpass;
    bool use_lowpass;
    double next();
  };
  struct Tone {
    double freq_hz;
    double amplitude;
    double phase;
    std::optional<TimeWindow> window;
  };

  void advance(std::size_t n);

  const Scenario* sc_;
  core::PositionGrid position_;
  core::TimeGrid time_;
  WindField wind_;
  double noise_gain_ = 1.0;
  std::size_t node_first_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> coupling_;
  std::vector<std::size_t> node_a_;  // relative to node_first_
  std::vector<double> weight_a_;
  std::vector<double> weight_b_;
  std::vector<int> tone_of_;  // tone index per position, -1 for none
  std::vector<Tone> tones_;
  std::size_t frame_ = 0;

  // Scratch for one advance() call.
  std::vector<double> node_buf_;  // [n x nodes]
  std::vector<double> env_buf_;
  std::vector<double> tone_buf_;  // [n x tones]

  // Span aggregation weights.
  std::vector<Span> spans_;
  std::vector<double> span_node_w_;  // [spans x nodes]
  std::vector<double> span_tone_w_;  // [spans x tones]
  std::vector<std::size_t> span_node_lo_;  // nonzero node range per span
  std::vector<std::size_t> span_node_hi_;
};

StrainField synthesize_field(const Scenario& sc, const core::PositionGrid& position,
                             const core::TimeGrid& time);

/// Block std of the dynamic field without materializing it (ground truth for
/// the DAS std waterfall). Consumes the synthesizer.
core::Waterfall dynamic_block_std(FieldSynthesizer& synth, std::size_t block_t, std::size_t block_x);

}  // namespace fibersense::scenario
