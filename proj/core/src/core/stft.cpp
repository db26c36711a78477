#include "fibersense/core/stft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

#include <fftw3.h>
#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::core {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

std::size_t hop_length(const StftOptions& opt) {
  const auto hop = static_cast<std::size_t>(
      std::llround(static_cast<double>(opt.window_len) * (1.0 - opt.overlap)));
  return std::max<std::size_t>(hop, 1);
}

void check_options(std::size_t n, const StftOptions& opt) {
  if (opt.window_len < 2) throw InvalidArgument("STFT window must hold at least two samples");
  if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) {
    throw InvalidArgument(fmt::format("STFT overlap {} outside [0, 1)", opt.overlap));
  }
  if (n < opt.window_len) {
    throw InvalidArgument(
        fmt::format("series of {} samples is shorter than one {}-sample window", n, opt.window_len));
  }
}

}  // namespace

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::hann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return w;
}

std::vector<double> stft_power(std::span<const double> samples, const StftOptions& opt,
                               std::size_t* frames_out) {
  check_options(samples.size(), opt);
  const std::size_t len = opt.window_len;
  const std::size_t hop = hop_length(opt);
  const std::size_t frames = 1 + (samples.size() - len) / hop;
  const std::size_t bins = len / 2 + 1;
  const auto window = make_window(opt.window, len);

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * len)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  PlanPtr plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(len), in.get(), out.get(), FFTW_ESTIMATE));
  }

  std::vector<double> power(frames * bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* src = samples.data() + f * hop;
    for (std::size_t i = 0; i < len; ++i) in.get()[i] = src[i] * window[i];
    fftw_execute_dft_r2c(plan.get(), in.get(), out.get());
    double* dst = power.data() + f * bins;
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = out.get()[k][0];
      const double im = out.get()[k][1];
      dst[k] = re * re + im * im;
    }
  }
  if (frames_out) *frames_out = frames;
  return power;
}

Waterfall stft_spectrogram(const Series& s, const StftOptions& opt) {
  s.validate();
  std::size_t frames = 0;
  const auto power = stft_power(s.values, opt, &frames);
  const std::size_t len = opt.window_len;
  const std::size_t bins = len / 2 + 1;
  const double fs = s.time.rate_hz();

  const TimeGrid time{add_seconds(s.time.t0, 0.5 * static_cast<double>(len - 1) * s.time.dt_s),
                      s.time.dt_s * static_cast<double>(hop_length(opt)), frames};
  const PositionGrid freq{0.0, fs / static_cast<double>(len), bins};
  Waterfall out = Waterfall::zeros(time, freq, Unit::decibel, AxisKind::frequency);

  const double peak = *std::max_element(power.begin(), power.end());
  for (std::size_t i = 0; i < power.size(); ++i) {
    double db = kDbFloor;
    if (peak > 0.0 && power[i] > 0.0) db = std::max(kDbFloor, 10.0 * std::log10(power[i] / peak));
    out.values[i] = static_cast<float>(db);
  }
  return out;
}

std::vector<double> time_averaged_db(const Waterfall& spectrogram, std::size_t row_begin,
                                     std::size_t row_end) {
  row_end = std::min(row_end, spectrogram.rows());
  if (row_begin >= row_end) throw InvalidArgument("empty frame range for spectrum average");
  std::vector<double> acc(spectrogram.cols(), 0.0);
  for (std::size_t r = row_begin; r < row_end; ++r) {
    const auto row = spectrogram.row(r);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += std::pow(10.0, row[c] / 10.0);
  }
  const double n = static_cast<double>(row_end - row_begin);
  for (double& v : acc) {
    const double p = v / n;
    v = p > 0.0 ? std::max(kDbFloor, 10.0 * std::log10(p)) : kDbFloor;
  }
  return acc;
}

}  // namespace fibersense::core
