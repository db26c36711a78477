#include "fibersense/das/das.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/parallel.hpp"
#include "fibersense/core/stats.hpp"

namespace fibersense::das {

using core::kPi;
using core::kTwoPi;

void DasConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(fmt::format("das: {} must be positive", name));
  };
  positive(gauge_length_m, "gauge_length_m");
  positive(prf_hz, "prf_hz");
  positive(sample_spacing_m, "sample_spacing_m");
  positive(pulse_width_ns, "pulse_width_ns");
  positive(wavelength_nm, "wavelength_nm");
  positive(group_index, "group_index");
  positive(strain_phase_coeff, "strain_phase_coeff");
  if (!(phase_noise_std_rad >= 0.0) || !std::isfinite(phase_noise_std_rad)) {
    throw InvalidArgument("das: phase_noise_std_rad must be non-negative");
  }
  if (gauge_length_m < sample_spacing_m) {
    throw InvalidArgument(fmt::format("das: gauge length {} m is shorter than the sample spacing {} m",
                                      gauge_length_m, sample_spacing_m));
  }
}

double DasConfig::strain_per_radian() const {
  return wavelength_nm * 1e-9 / (4.0 * kPi * group_index * strain_phase_coeff * gauge_length_m);
}

std::size_t DasConfig::gauge_samples() const {
  return static_cast<std::size_t>(std::ceil(gauge_length_m / sample_spacing_m - 1e-9));
}

void PhaseRecord::validate() const {
  phase.validate();
  for (float v : phase.values) {
    if (!(v > -kPi && v <= static_cast<float>(kPi))) throw InvalidArgument("phase record: value outside (-pi, pi]");
  }
}

double wrap_phase(double x) { return x - kTwoPi * std::ceil((x - kPi) / kTwoPi); }

// Float rounding can push values just above -pi onto it; those are
// represented by the equivalent +pi.
float wrap_phase_float(double x) {
  const auto f = static_cast<float>(wrap_phase(x));
  return f <= -kPi ? static_cast<float>(kPi) : f;
}

double phase_to_strain(double delta_phi_rad, const DasConfig& cfg) {
  return cfg.strain_per_radian() * delta_phi_rad;
}

void gauge_average(std::span<const float> row, std::size_t len, std::span<double> out) {
  const std::size_t n = row.size();
  const std::size_t back = (len - 1) / 2;
  const std::size_t ahead = len - 1 - back;
  thread_local std::vector<double> prefix;
  prefix.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + row[i];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= back ? i - back : 0;
    const std::size_t hi = std::min(n, i + ahead + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
}

PhaseSimulator::PhaseSimulator(std::size_t channels, const DasConfig& cfg)
    : cfg_(cfg), channels_(channels), gauge_(cfg.gauge_samples()) {
  cfg_.validate();
  if (gauge_ > channels) {
    throw InvalidArgument(fmt::format("das: gauge length {} m exceeds the {} m fiber", cfg.gauge_length_m,
                                      cfg.sample_spacing_m * static_cast<double>(channels)));
  }
  rad_per_nstrain_ = 1e-9 / cfg_.strain_per_radian();
  noise_.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) noise_.emplace_back(core::derive_seed(cfg_.seed, "das-phase-noise", c));
}

void PhaseSimulator::process(std::span<const float> strain_nstrain, std::span<float> phase) {
  if (strain_nstrain.size() % channels_ != 0 || phase.size() < strain_nstrain.size()) {
    throw InvalidArgument("das: phase simulator buffer shape mismatch");
  }
  const std::size_t rows = strain_nstrain.size() / channels_;
  averaged_.resize(rows * channels_);
  core::parallel_for(rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      gauge_average(strain_nstrain.subspan(r * channels_, channels_), gauge_,
                    std::span<double>(averaged_.data() + r * channels_, channels_));
    }
  });
  // Noise is drawn per channel into a channel-major buffer so each stream
  // advances in time order, then added in row tiles.
  const double sigma = cfg_.phase_noise_std_rad;
  if (sigma > 0.0) {
    noise_buf_.resize(rows * channels_);
    core::parallel_for(channels_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        double* col = noise_buf_.data() + c * rows;
        for (std::size_t r = 0; r < rows; ++r) col[r] = sigma * noise_[c].normal();
      }
    });
  }
  constexpr std::size_t kTile = 16;
  core::parallel_for((rows + kTile - 1) / kTile, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t r0 = t * kTile;
      const std::size_t r1 = std::min(rows, r0 + kTile);
      for (std::size_t c = 0; c < channels_; ++c) {
        for (std::size_t r = r0; r < r1; ++r) {
          double v = averaged_[r * channels_ + c] * rad_per_nstrain_;
          if (sigma > 0.0) v += noise_buf_[c * rows + r];
          phase[r * channels_ + c] = wrap_phase_float(v);
        }
      }
    }
  });
}

StrainRecovery::StrainRecovery(std::size_t channels, const DasConfig& cfg)
    : channels_(channels),
      nstrain_per_rad_(cfg.strain_per_radian() * 1e9),
      previous_(channels),
      unwrapped_(channels),
      first_(channels) {}

void StrainRecovery::process(std::span<const float> phase, std::span<float> strain_nstrain) {
  if (phase.size() % channels_ != 0 || strain_nstrain.size() < phase.size()) {
    throw InvalidArgument("das: strain recovery buffer shape mismatch");
  }
  const std::size_t rows = phase.size() / channels_;
  if (rows == 0) return;
  std::size_t r0 = 0;
  if (!started_) {
    for (std::size_t c = 0; c < channels_; ++c) {
      previous_[c] = unwrapped_[c] = first_[c] = phase[c];
      strain_nstrain[c] = 0.0f;
    }
    started_ = true;
    r0 = 1;
  }
  core::parallel_for(channels_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = r0; r < rows; ++r) {
      const float* in = phase.data() + r * channels_;
      float* out = strain_nstrain.data() + r * channels_;
      for (std::size_t c = begin; c < end; ++c) {
        const double cur = in[c];
        unwrapped_[c] += wrap_phase(cur - previous_[c]);
        previous_[c] = cur;
        out[c] = static_cast<float>((unwrapped_[c] - first_[c]) * nstrain_per_rad_);
      }
    }
  });
}

namespace {

void check_spacing(const core::PositionGrid& grid, const DasConfig& cfg) {
  if (std::abs(grid.spacing_m - cfg.sample_spacing_m) > 1e-9 * cfg.sample_spacing_m) {
    throw InvalidArgument(fmt::format("das: field spacing {} m differs from the configured {} m", grid.spacing_m,
                                      cfg.sample_spacing_m));
  }
}

std::vector<float> recover_all(const PhaseRecord& p, const DasConfig& cfg) {
  StrainRecovery rec(p.phase.cols(), cfg);
  std::vector<float> out(p.phase.values.size());
  rec.process(p.phase.values, out);
  return out;
}

}  // namespace

PhaseRecord simulate_phase(const scenario::StrainField& field, const DasConfig& cfg) {
  check_spacing(field.position, cfg);
  PhaseSimulator sim(field.position.count, cfg);
  PhaseRecord rec{core::Waterfall::zeros(field.time, field.position, core::Unit::radian)};
  sim.process(field.dynamic_nstrain, rec.phase.values);
  return rec;
}

core::Waterfall unwrap_time(const PhaseRecord& p) {
  core::Waterfall out = core::Waterfall::zeros(p.phase.time, p.phase.position, core::Unit::radian);
  const std::size_t rows = p.phase.rows();
  const std::size_t cols = p.phase.cols();
  core::parallel_for(cols, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      double prev = p.phase(0, c);
      double acc = prev;
      out(0, c) = static_cast<float>(acc);
      for (std::size_t r = 1; r < rows; ++r) {
        const double cur = p.phase(r, c);
        acc += wrap_phase(cur - prev);
        prev = cur;
        out(r, c) = static_cast<float>(acc);
      }
    }
  });
  return out;
}

core::Waterfall std_waterfall(const PhaseRecord& p, const DasConfig& cfg, std::size_t block_t,
                              std::size_t block_x) {
  if (p.phase.values.empty()) throw InvalidArgument("das: empty phase record");
  core::Waterfall strain{p.phase.time, p.phase.position, core::AxisKind::position, core::Unit::nanostrain,
                         recover_all(p, cfg)};
  core::Waterfall out = core::windowed_std(strain, block_t, block_x);
  out.unit = core::Unit::nanostrain;
  return out;
}

core::Series strain_at(const PhaseRecord& p, const DasConfig& cfg, double position_m) {
  const std::size_t c = p.phase.position.nearest_index(position_m);
  std::vector<float> column(p.phase.rows());
  for (std::size_t r = 0; r < column.size(); ++r) column[r] = p.phase(r, c);
  std::vector<float> strain(column.size());
  StrainRecovery(1, cfg).process(column, strain);
  return core::Series{p.phase.time, std::vector<double>(strain.begin(), strain.end()), core::Unit::nanostrain};
}

core::Waterfall das_spectrogram(const PhaseRecord& p, const DasConfig& cfg, double position_m,
                                const core::StftOptions& opt) {
  return core::stft_spectrogram(strain_at(p, cfg, position_m), opt);
}

}  // namespace fibersense::das
