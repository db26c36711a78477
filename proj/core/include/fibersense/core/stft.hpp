#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fibersense/core/types.hpp"

namespace fibersense::core {

enum class WindowKind { hann, rect };

/// Clamp applied to the log of zero (or relatively negligible) power.
inline constexpr double kDbFloor = -200.0;

struct StftOptions {
  std::size_t window_len = 4096;
  double overlap = 0.5;
  WindowKind window = WindowKind::hann;
};

/// Periodic (DFT-even) Hann or rectangular taper.
std::vector<double> make_window(WindowKind kind, std::size_t n);

/// One-sided power spectra of successive windows, linear units, row-major
/// [frames x (window_len / 2 + 1)]. Throws if the series is shorter than one window.
std::vector<double> stft_power(std::span<const double> samples, const StftOptions& opt,
                               std::size_t* frames_out);

/// Spectrogram in dB relative to the strongest bin, clamped at kDbFloor.
/// Rows are frames (timestamped at the window centre), columns are
/// frequencies 0 .. fs/2 at fs / window_len spacing.
Waterfall stft_spectrogram(const Series& s, const StftOptions& opt = {});

/// Mean linear power over rows [row_begin, row_end) of a dB spectrogram, in dB
/// relative to the same reference as the input.
std::vector<double> time_averaged_db(const Waterfall& spectrogram, std::size_t row_begin,
                                     std::size_t row_end);

}  // namespace fibersense::core
