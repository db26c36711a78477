#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fibersense/core/io.hpp"
#include "fibersense/core/stft.hpp"
#include "fibersense/core/types.hpp"
#include "fibersense/scenario/field.hpp"

namespace fibersense::sop {

/// Normalized Stokes vector (s1, s2, s3) on the Poincare sphere.
using Stokes = std::array<double, 3>;

struct SopConfig {
  double sample_rate_hz = 44100.0;
  double highpass_corner_hz = 2.0;
  std::size_t n_plates = 64;
  /// Retardance change per unit strain of a plate's mean strain, rad.
  double strain_to_retardance = 1e8;
  double rotation_drift_rad_s = 0.0;
  /// Detector noise std relative to the total received power.
  double detector_noise_std = 0.0;
  /// Polarization-dependent loss ahead of the splitter, dB, axis along s2.
  double pdl_db = 3.0;
  double total_power = 1.0;
  /// Launch state: 45 degrees to both splitter axes.
  Stokes input_state{0.0, 1.0, 0.0};
  std::uint64_t seed = 0;

  void validate() const;
};

/// One lumped birefringent element: a rotation of the Stokes vector about
/// `axis` (linear birefringence, in the s1-s2 plane) by the element's retardance.
struct Plate {
  double start_m = 0.0;
  double end_m = 0.0;
  Stokes axis{1.0, 0.0, 0.0};
  double base_retardance = 0.0;
};

/// Splits the cable into cfg.n_plates elements. Every segment gets at least
/// one element and the rest are shared in proportion to segment length, so
/// element boundaries follow segment boundaries.
std::vector<Plate> plate_layout(const scenario::Scenario& sc, const SopConfig& cfg);

/// Rotation of s about the unit axis by angle (Rodrigues).
Stokes rotate(const Stokes& s, const Stokes& axis, double angle);

/// Ordered product of the element rotations applied to the launch state.
class Cascade {
 public:
  Cascade(std::vector<Plate> plates, const SopConfig& cfg);
  const std::vector<Plate>& plates() const { return plates_; }
  /// Output state for the given per-plate mean strains (dimensionless) at
  /// elapsed time t_s.
  Stokes propagate(std::span<const double> plate_strain, double t_s) const;
  /// Output state for explicit per-plate retardances.
  Stokes propagate_retardance(std::span<const double> retardance) const;

 private:
  std::vector<Plate> plates_;
  SopConfig cfg_;
};

/// End-of-fiber polarization states on the field's time grid. Only the
/// output of the whole cascade is exposed.
struct StateSeries {
  core::TimeGrid time;
  std::vector<Stokes> states;
};

StateSeries propagate_polarization(const scenario::StrainField& field, const std::vector<Plate>& plates,
                                   const SopConfig& cfg);
/// Same, driven by per-plate span means streamed from the synthesizer.
StateSeries propagate_polarization(scenario::FieldSynthesizer& synth, const std::vector<Plate>& plates,
                                   const SopConfig& cfg, std::size_t chunk_frames = 600);

/// AC-coupled outputs of the two photodiodes behind the polarization splitter.
struct SopTrace {
  core::TimeGrid time;
  std::vector<float> px;
  std::vector<float> py;
  double detector_noise_std = 0.0;

  void validate() const;
};

/// Upsamples the states to the detector rate (normalized linear
/// interpolation), splits px = P (1 + s1) / 2 and py = P (1 - s1) / 2 with
/// P = P0 (1 + g s2) from the PDL element, adds detector noise and applies
/// the first-order high-pass to each channel.
SopTrace detect(const StateSeries& states, const SopConfig& cfg);

/// Windowed S1/S0 with S1 = rms(px) - rms(py), S0 = rms(px) + rms(py).
struct StokesSeries {
  core::Series s1_norm;
  /// 0 where S0 does not exceed the detector noise floor.
  std::vector<std::uint8_t> valid;
};

StokesSeries stokes_rms(const SopTrace& trace, double window_s);

/// Population std of s1_norm over windows whose centres fall in [begin, end).
double fluctuation_magnitude(const StokesSeries& s, core::UtcTime begin, core::UtcTime end);

/// px - py, block-averaged down to at most max_rate_hz.
core::Series decimated_difference(const SopTrace& trace, double max_rate_hz = 200.0);

/// Default SOP spectrogram window: about 80 s at the decimated rate, long
/// enough to pull a cable-integrated tone out of the storm background.
inline core::StftOptions sop_stft_defaults() { return core::StftOptions{16384, 0.5, core::WindowKind::hann}; }

/// Spectrogram of px - py after decimation to at most 200 Hz.
core::Waterfall sop_spectrogram(const SopTrace& trace, const core::StftOptions& opt = sop_stft_defaults());

/// Raw trace file: time rows of two interleaved channels (px, py).
void write_sop_trace(const std::filesystem::path& path, const SopTrace& trace,
                     const nlohmann::json& meta = nlohmann::json::object());
SopTrace read_sop_trace(const std::filesystem::path& path, nlohmann::json* meta_out = nullptr);

}  // namespace fibersense::sop
