#include "fibersense/botdr/botdr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/parallel.hpp"
#include "fibersense/core/rng.hpp"

namespace fibersense::botdr {

void BotdrConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(scan_start_hz) || !finite(scan_stop_hz) || scan_stop_hz < scan_start_hz) {
    throw InvalidArgument("botdr: scan_stop_hz must not be below scan_start_hz");
  }
  if (!(scan_step_hz > 0.0)) throw InvalidArgument("botdr: scan_step_hz must be positive");
  const double steps = (scan_stop_hz - scan_start_hz) / scan_step_hz;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw InvalidArgument(fmt::format("botdr: step {} Hz does not divide the {} Hz scan span", scan_step_hz,
                                      scan_stop_hz - scan_start_hz));
  }
  if (!(pulse_width_us > 0.0)) throw InvalidArgument("botdr: pulse_width_us must be positive");
  if (averages < 1) throw InvalidArgument("botdr: averages must be at least 1");
  if (!(linewidth_hz > 0.0)) throw InvalidArgument("botdr: linewidth_hz must be positive");
  if (!(strain_coeff_mhz_per_ue > 0.0)) throw InvalidArgument("botdr: strain_coeff_mhz_per_ue must be positive");
  if (!finite(temp_coeff_mhz_per_k)) throw InvalidArgument("botdr: temp_coeff_mhz_per_k must be finite");
  if (!finite(base_bfs_hz)) throw InvalidArgument("botdr: base_bfs_hz must be finite");
  if (!(single_shot_noise_std >= 0.0)) throw InvalidArgument("botdr: single_shot_noise_std must be non-negative");
  if (!(group_index > 0.0)) throw InvalidArgument("botdr: group_index must be positive");
}

double BotdrConfig::resolution_m() const { return pulse_to_resolution(pulse_width_us * 1e-6, group_index); }

std::vector<double> scan_grid(const BotdrConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(std::llround((cfg.scan_stop_hz - cfg.scan_start_hz) / cfg.scan_step_hz)) + 1;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = cfg.scan_start_hz + static_cast<double>(i) * cfg.scan_step_hz;
  return f;
}

double pulse_to_resolution(double pulse_width_s, double group_index) {
  if (!(pulse_width_s > 0.0) || !(group_index > 0.0)) {
    throw InvalidArgument("pulse_to_resolution: inputs must be positive");
  }
  return core::kSpeedOfLight * pulse_width_s / (2.0 * group_index);
}

double lorentzian(double nu_hz, double center_hz, double linewidth_hz) {
  const double h = 0.5 * linewidth_hz;
  const double d = nu_hz - center_hz;
  return h * h / (d * d + h * h);
}

void SpectrumStack::validate() const {
  position.validate();
  frequency.validate();
  if (power.size() != position.count * frequency.count) throw InvalidArgument("spectrum stack: shape mismatch");
  for (float v : power) {
    if (!std::isfinite(v) || v < 0.0f) throw InvalidArgument("spectrum stack: powers must be finite and >= 0");
  }
}

SpectrumStack simulate_spectra(const core::PositionGrid& position, std::span<const double> strain_ue,
                               std::span<const double> temperature_k, const BotdrConfig& cfg,
                               std::uint64_t stream) {
  cfg.validate();
  position.validate();
  const std::size_t np = position.count;
  if (strain_ue.size() != np || temperature_k.size() != np) {
    throw InvalidArgument("botdr: strain/temperature profile length differs from the position grid");
  }
  const std::vector<double> freq = scan_grid(cfg);
  const std::size_t nf = freq.size();

  // Local spectra, then a running sum along position for the resolution box.
  std::vector<double> prefix((np + 1) * nf, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    const double center = cfg.base_bfs_hz + 1e6 * (cfg.strain_coeff_mhz_per_ue * strain_ue[i] +
                                                  cfg.temp_coeff_mhz_per_k * temperature_k[i]);
    for (std::size_t k = 0; k < nf; ++k) {
      prefix[(i + 1) * nf + k] = prefix[i * nf + k] + lorentzian(freq[k], center, cfg.linewidth_hz);
    }
  }
  const auto box = static_cast<std::size_t>(std::max(1.0, std::round(cfg.resolution_m() / position.spacing_m)));
  const std::size_t back = (box - 1) / 2;
  const std::size_t ahead = box - 1 - back;
  const double sigma = cfg.single_shot_noise_std / std::sqrt(static_cast<double>(cfg.averages));

  SpectrumStack s{position, core::PositionGrid{cfg.scan_start_hz, cfg.scan_step_hz, nf}, std::vector<float>(np * nf)};
  core::parallel_for(np, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t lo = i >= back ? i - back : 0;
      const std::size_t hi = std::min(np, i + ahead + 1);
      const double inv = 1.0 / static_cast<double>(hi - lo);
      core::Rng rng(core::derive_seed(cfg.seed, "botdr-noise", (stream << 32) ^ i));
      for (std::size_t k = 0; k < nf; ++k) {
        double v = (prefix[hi * nf + k] - prefix[lo * nf + k]) * inv;
        if (sigma > 0.0) v += sigma * rng.normal();
        s.power[i * nf + k] = static_cast<float>(std::max(v, 0.0));
      }
    }
  });
  return s;
}

SpectrumStack simulate_spectra(const scenario::StrainField& field, scenario::Epoch epoch, const BotdrConfig& cfg) {
  const auto& strain = field.static_profile(epoch);
  std::vector<double> temperature = field.temperature_delta_k;
  if (temperature.empty()) temperature.assign(field.position.count, 0.0);
  return simulate_spectra(field.position, strain, temperature, cfg, static_cast<std::uint64_t>(epoch));
}

void BfsProfile::validate() const {
  position.validate();
  if (bfs_hz.size() != position.count || fit_quality.size() != position.count || valid.size() != position.count) {
    throw InvalidArgument("bfs profile: vector lengths differ from the position grid");
  }
}

BfsProfile fit_bfs(const SpectrumStack& stack, const BotdrConfig& cfg) {
  (void)cfg;
  stack.validate();
  if (stack.bins() < 5) throw InvalidArgument("fit_bfs: at least 5 frequency points are required");
  const std::size_t np = stack.positions();
  std::vector<double> freq(stack.bins());
  for (std::size_t k = 0; k < freq.size(); ++k) freq[k] = stack.frequency.at(k);
  BfsProfile p{stack.position, std::vector<double>(np, 0.0), std::vector<double>(np, 0.0),
               std::vector<std::uint8_t>(np, 0)};
  core::parallel_for(np, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(freq.size());
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = stack.spectrum(i);
      std::copy(row.begin(), row.end(), y.begin());
      const PeakFit f = fit_peak(freq, y);
      p.bfs_hz[i] = f.center_hz;
      p.fit_quality[i] = f.quality;
      p.valid[i] = f.valid ? 1 : 0;
    }
  });
  return p;
}

core::Profile strain_difference(const BfsProfile& before, const BfsProfile& after, const BotdrConfig& cfg) {
  before.validate();
  after.validate();
  if (!(before.position == after.position)) {
    throw InvalidArgument("strain_difference: BFS profiles are on different position grids");
  }
  core::Profile d = core::Profile::filled(before.position, 0.0, core::Unit::microstrain);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const bool ok = before.valid[i] && after.valid[i];
    d.valid[i] = ok ? 1 : 0;
    d.values[i] = ok ? (after.bfs_hz[i] - before.bfs_hz[i]) * 1e-6 / cfg.strain_coeff_mhz_per_ue : 0.0;
  }
  return d;
}

void write_spectrum_stack(const std::filesystem::path& path, const SpectrumStack& s, const nlohmann::json& meta) {
  s.validate();
  core::ArrayHeader h;
  h.kind = "spectrum_stack";
  h.unit = core::Unit::power;
  h.rows = core::Axis::from_positions(s.position);
  h.cols = core::Axis::from_positions(s.frequency, "frequency");
  h.meta = meta;
  core::write_array(path, h, s.power);
}

SpectrumStack read_spectrum_stack(const std::filesystem::path& path, nlohmann::json* meta_out) {
  core::ArrayHeader h;
  std::vector<float> values = core::read_array(path, &h);
  if (h.kind != "spectrum_stack") {
    throw FormatError(fmt::format("'{}': expected a spectrum_stack, found '{}'", path.string(), h.kind));
  }
  if (meta_out) *meta_out = h.meta;
  SpectrumStack s{h.rows.as_positions(), h.cols.as_positions(), std::move(values)};
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(fmt::format("'{}': {}", path.string(), e.what()));
  }
  return s;
}

void write_bfs_csv(const std::filesystem::path& path, const BfsProfile& p) {
  p.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  os << "position_m,bfs_hz,fit_quality,valid\n";
  for (std::size_t i = 0; i < p.position.count; ++i) {
    os << core::format_number(p.position.at(i)) << ',' << core::format_number(p.bfs_hz[i]) << ','
       << core::format_number(p.fit_quality[i]) << ',' << static_cast<int>(p.valid[i]) << '\n';
  }
  if (!os) throw std::runtime_error(fmt::format("error writing '{}'", path.string()));
}

BfsProfile read_bfs_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::getline(is, line);
  if (line.rfind("position_m,bfs_hz", 0) != 0) {
    throw FormatError(fmt::format("'{}': missing BFS CSV header", path.string()));
  }
  std::vector<double> pos;
  BfsProfile p;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, d;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
        !std::getline(ss, d)) {
      throw FormatError(fmt::format("{}:{}: expected 4 columns", path.string(), lineno));
    }
    try {
      pos.push_back(std::stod(a));
      p.bfs_hz.push_back(std::stod(b));
      p.fit_quality.push_back(std::stod(c));
      p.valid.push_back(static_cast<std::uint8_t>(std::stoi(d) != 0));
    } catch (const std::exception&) {
      throw FormatError(fmt::format("{}:{}: malformed number", path.string(), lineno));
    }
  }
  if (pos.size() < 1) throw FormatError(fmt::format("'{}': no rows", path.string()));
  const double spacing = pos.size() > 1 ? pos[1] - pos[0] : 1.0;
  p.position = core::PositionGrid{pos[0], spacing, pos.size()};
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (std::abs(p.position.at(i) - pos[i]) > 1e-6 * std::max(1.0, std::abs(spacing))) {
      throw FormatError(fmt::format("{}:{}: positions are not uniformly spaced", path.string(), i + 2));
    }
  }
  return p;
}

}  // namespace fibersense::botdr
