#pragma once

#include <complex>
#include <cstddef>

namespace fibersense::core {

/// Direct-form-I biquad, normalized so a0 == 1.
class Biquad {
 public:
  Biquad() = default;
  Biquad(double b0, double b1, double b2, double a1, double a2)
      : b0_(b0), b1_(b1), b2_(b2), a1_(a1), a2_(a2) {}

  /// Second-order Butterworth sections via the bilinear transform with prewarping.
  static Biquad butterworth_lowpass(double corner_hz, double rate_hz);
  static Biquad butterworth_highpass(double corner_hz, double rate_hz);

  double step(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }
  void reset() { x1_ = x2_ = y1_ = y2_ = 0.0; }

 private:
  double b0_ = 1.0, b1_ = 0.0, b2_ = 0.0, a1_ = 0.0, a2_ = 0.0;
  double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

/// First-order high-pass, bilinear transform of H(s) = s / (s + wc) with the
/// corner prewarped so |H| is exactly 1/sqrt(2) at corner_hz:
///
///   K  = tan(pi * fc / fs)
///   b0 = 1 / (1 + K),  b1 = -b0,  a1 = (K - 1) / (K + 1)
///   y[n] = b0 * x[n] + b1 * x[n-1] - a1 * y[n-1]
///
/// The first sample primes x[n-1] with x[0], i.e. the input is assumed to
/// have been constant before the record started, so a DC input yields zero.
class FirstOrderHighPass {
 public:
  FirstOrderHighPass(double corner_hz, double rate_hz);

  double step(double x) {
    if (!primed_) {
      x1_ = x;
      primed_ = true;
    }
    const double y = b0_ * x + b1_ * x1_ - a1_ * y1_;
    x1_ = x;
    y1_ = y;
    return y;
  }

  double b0() const { return b0_; }
  double a1() const { return a1_; }

 private:
  double b0_, b1_, a1_;
  double x1_ = 0.0, y1_ = 0.0;
  bool primed_ = false;
};

/// |H(f)| of the analog first-order high-pass with corner fc.
double first_order_highpass_gain(double f_hz, double corner_hz);

/// Single-bin DFT by the Goertzel recursion.
class Goertzel {
 public:
  Goertzel(double freq_hz, double rate_hz);

  void push(double x) {
    const double s = x + coeff_ * s1_ - s2_;
    s2_ = s1_;
    s1_ = s;
    ++n_;
  }
  std::size_t count() const { return n_; }
  /// Complex DFT value at the configured frequency over the pushed samples.
  std::complex<double> value() const;
  /// Mean-square amplitude of the component at the frequency: a sine of
  /// amplitude a spanning an integer number of periods yields a^2 / 2.
  double power() const;

 private:
  double omega_;
  double coeff_;
  double s1_ = 0.0, s2_ = 0.0;
  std::size_t n_ = 0;
};

}  // namespace fibersense::core
