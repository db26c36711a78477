#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fibersense/core/io.hpp"
#include "fibersense/core/types.hpp"
#include "fibersense/scenario/field.hpp"

namespace fibersense::botdr {

struct BotdrConfig {
  double scan_start_hz = 10.60e9;
  double scan_stop_hz = 10.67e9;
  double scan_step_hz = 1e6;
  double pulse_width_us = 2.5;
  std::size_t averages = 4000;
  double linewidth_hz = 30e6;
  double strain_coeff_mhz_per_ue = 0.05;
  double temp_coeff_mhz_per_k = 1.0;
  double base_bfs_hz = 10.63e9;
  /// Noise std of a single acquisition, relative to the unit peak gain.
  double single_shot_noise_std = 0.1;
  double group_index = 1.468;
  std::uint64_t seed = 0;

  void validate() const;
  double resolution_m() const;
};

/// Inclusive scan frequencies start, start + step, ..., stop.
std::vector<double> scan_grid(const BotdrConfig& cfg);

/// Two-point spatial resolution c * tau / (2 n).
double pulse_to_resolution(double pulse_width_s, double group_index);

/// Normalized Lorentzian gain (Gamma/2)^2 / ((nu - nu_b)^2 + (Gamma/2)^2).
double lorentzian(double nu_hz, double center_hz, double linewidth_hz);

/// Brillouin gain spectra, row-major [position x frequency].
struct SpectrumStack {
  core::PositionGrid position;
  core::PositionGrid frequency;  // Hz
  std::vector<float> power;

  std::size_t positions() const { return position.count; }
  std::size_t bins() const { return frequency.count; }
  std::span<const float> spectrum(std::size_t i) const { return {power.data() + i * bins(), bins()}; }
  void validate() const;
};

/// Spectra for a static strain (microstrain) and temperature (kelvin) profile.
/// Each spectrum is the mean of the local spectra over one resolution cell
/// centred on the position, plus white noise of std
/// single_shot_noise_std / sqrt(averages); powers are clamped at zero.
/// `stream` separates the noise of different acquisitions.
SpectrumStack simulate_spectra(const core::PositionGrid& position, std::span<const double> strain_ue,
                               std::span<const double> temperature_k, const BotdrConfig& cfg,
                               std::uint64_t stream);
SpectrumStack simulate_spectra(const scenario::StrainField& field, scenario::Epoch epoch, const BotdrConfig& cfg);

struct BfsProfile {
  core::PositionGrid position;
  std::vector<double> bfs_hz;
  /// Residual norm over signal norm of the fitted spectrum.
  std::vector<double> fit_quality;
  std::vector<std::uint8_t> valid;

  void validate() const;
};

enum class FitMethod : std::uint8_t { lorentzian, quadratic, failed };

struct PeakFit {
  double center_hz = 0.0;
  double linewidth_hz = 0.0;
  double amplitude = 0.0;
  double quality = 0.0;
  FitMethod method = FitMethod::failed;
  bool valid = false;
};

/// Fits one spectrum: argmax, then Levenberg-Marquardt on (amplitude, center,
/// width); falls back to a parabola through the five points around the
/// maximum if that does not converge in 100 iterations. Flat spectra and
/// centers outside the scan are invalid.
PeakFit fit_peak(std::span<const double> freq_hz, std::span<const double> power);

BfsProfile fit_bfs(const SpectrumStack& stack, const BotdrConfig& cfg);

/// Strain change (after - before) / C_eps in microstrain; invalid fits leave gaps.
core::Profile strain_difference(const BfsProfile& before, const BfsProfile& after, const BotdrConfig& cfg);

void write_spectrum_stack(const std::filesystem::path& path, const SpectrumStack& s,
                          const nlohmann::json& meta = nlohmann::json::object());
SpectrumStack read_spectrum_stack(const std::filesystem::path& path, nlohmann::json* meta_out = nullptr);

/// CSV `position_m,bfs_hz,fit_quality,valid`.
void write_bfs_csv(const std::filesystem::path& path, const BfsProfile& p);
BfsProfile read_bfs_csv(const std::filesystem::path& path);

}  // namespace fibersense::botdr
