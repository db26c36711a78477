#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fibersense/core/rng.hpp"
#include "fibersense/core/stft.hpp"
#include "fibersense/core/types.hpp"
#include "fibersense/scenario/field.hpp"

namespace fibersense::das {

struct DasConfig {
  double gauge_length_m = 40.0;
  double prf_hz = 600.0;
  double sample_spacing_m = 10.0;
  double pulse_width_ns = 500.0;
  double wavelength_nm = 1550.12;
  double group_index = 1.468;
  /// Strain-optic phase factor xi.
  double strain_phase_coeff = 0.78;
  double phase_noise_std_rad = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Strain per radian of differential phase, K = lambda / (4 pi n xi L_g).
  double strain_per_radian() const;
  /// Moving-mean length used for gauge averaging, ceil(L_g / spacing).
  std::size_t gauge_samples() const;
};

/// Wrapped differential phase in radians, each value in (-pi, pi].
struct PhaseRecord {
  core::Waterfall phase;

  void validate() const;
};

/// Maps x into (-pi, pi]; an argument of exactly -pi maps to +pi.
double wrap_phase(double x);
/// wrap_phase rounded to float, still inside (-pi, pi] in float terms.
float wrap_phase_float(double x);

/// Strain (dimensionless) for a differential phase change in radians.
double phase_to_strain(double delta_phi_rad, const DasConfig& cfg);
inline double phase_to_nanostrain(double delta_phi_rad, const DasConfig& cfg) {
  return phase_to_strain(delta_phi_rad, cfg) * 1e9;
}

/// Centered moving mean over `len` samples, truncated at the ends.
void gauge_average(std::span<const float> row, std::size_t len, std::span<double> out);

/// Streaming forward model: strain rows in, wrapped phase rows out.
///
/// Each channel draws phase noise from its own stream keyed by its index, so
/// the output does not depend on how frames are chunked.
class PhaseSimulator {
 public:
  PhaseSimulator(std::size_t channels, const DasConfig& cfg);
  /// `strain_nstrain` and `phase` hold n rows of `channels` values.
  void process(std::span<const float> strain_nstrain, std::span<float> phase);

 private:
  DasConfig cfg_;
  std::size_t channels_;
  std::size_t gauge_;
  double rad_per_nstrain_;
  std::vector<core::Rng> noise_;
  std::vector<double> averaged_;
  std::vector<double> noise_buf_;  // [channels x rows]
};

/// Streaming inverse: wrapped phase rows in, strain change relative to the
/// first frame out (nanostrain), via per-channel temporal unwrapping.
class StrainRecovery {
 public:
  StrainRecovery(std::size_t channels, const DasConfig& cfg);
  void process(std::span<const float> phase, std::span<float> strain_nstrain);

 private:
  std::size_t channels_;
  double nstrain_per_rad_;
  bool started_ = false;
  std::vector<double> previous_;   // last wrapped sample
  std::vector<double> unwrapped_;  // running unwrapped phase
  std::vector<double> first_;
};

/// Forward model over a materialized field (dynamic part only; static strain
/// is constant in time and cancels in the differential phase).
PhaseRecord simulate_phase(const scenario::StrainField& field, const DasConfig& cfg);

/// Temporal unwrap per position: first sample kept, successive differences
/// mapped into (-pi, pi] with +pi on ties.
core::Waterfall unwrap_time(const PhaseRecord& p);

/// Unwrap, difference against the first frame, convert to strain and reduce
/// to block population std, in nanostrain.
core::Waterfall std_waterfall(const PhaseRecord& p, const DasConfig& cfg, std::size_t block_t,
                              std::size_t block_x);

/// Recovered strain (nanostrain) at the grid position nearest position_m.
core::Series strain_at(const PhaseRecord& p, const DasConfig& cfg, double position_m);

/// Spectrogram of the recovered strain at the position nearest position_m.
core::Waterfall das_spectrogram(const PhaseRecord& p, const DasConfig& cfg, double position_m,
                                const core::StftOptions& opt = {});

}  // namespace fibersense::das
