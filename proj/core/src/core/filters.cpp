#include "fibersense/core/filters.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/units.hpp"

namespace fibersense::core {
namespace {

void check_corner(double corner_hz, double rate_hz) {
  if (!(corner_hz > 0.0) || !(rate_hz > 0.0) || corner_hz >= 0.5 * rate_hz) {
    throw InvalidArgument(fmt::format("corner {} Hz invalid at sample rate {} Hz", corner_hz, rate_hz));
  }
}

}  // namespace

Biquad Biquad::butterworth_lowpass(double corner_hz, double rate_hz) {
  check_corner(corner_hz, rate_hz);
  const double k = std::tan(kPi * corner_hz / rate_hz);
  const double q = 1.0 / std::sqrt(2.0);
  const double norm = 1.0 / (1.0 + k / q + k * k);
  const double b0 = k * k * norm;
  return Biquad(b0, 2.0 * b0, b0, 2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm);
}

Biquad Biquad::butterworth_highpass(double corner_hz, double rate_hz) {
  check_corner(corner_hz, rate_hz);
  const double k = std::tan(kPi * corner_hz / rate_hz);
  const double q = 1.0 / std::sqrt(2.0);
  const double norm = 1.0 / (1.0 + k / q + k * k);
  return Biquad(norm, -2.0 * norm, norm, 2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm);
}

FirstOrderHighPass::FirstOrderHighPass(double corner_hz, double rate_hz) {
  check_corner(corner_hz, rate_hz);
  const double k = std::tan(kPi * corner_hz / rate_hz);
  b0_ = 1.0 / (1.0 + k);
  b1_ = -b0_;
  a1_ = (k - 1.0) / (k + 1.0);
}

double first_order_highpass_gain(double f_hz, double corner_hz) {
  const double r = f_hz / corner_hz;
  return r / std::sqrt(1.0 + r * r);
}

Goertzel::Goertzel(double freq_hz, double rate_hz)
    : omega_(kTwoPi * freq_hz / rate_hz), coeff_(2.0 * std::cos(omega_)) {
  if (!(rate_hz > 0.0) || freq_hz < 0.0 || freq_hz > 0.5 * rate_hz) {
    throw InvalidArgument(fmt::format("Goertzel frequency {} Hz outside [0, {}] Hz", freq_hz, 0.5 * rate_hz));
  }
}

std::complex<double> Goertzel::value() const {
  // After N pushes, sum_n x[n] e^{-i w n} = e^{-i w (N-1)} (s1 - e^{-i w} s2).
  const std::complex<double> y = s1_ - std::polar(1.0, -omega_) * s2_;
  return y * std::polar(1.0, -omega_ * (static_cast<double>(n_) - 1.0));
}

double Goertzel::power() const {
  if (n_ == 0) return 0.0;
  const double mag2 = s1_ * s1_ + s2_ * s2_ - coeff_ * s1_ * s2_;
  const double n = static_cast<double>(n_);
  return 2.0 * mag2 / (n * n);
}

}  // namespace fibersense::core
