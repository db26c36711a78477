#include "fibersense/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/stats.hpp"
#include "fibersense/core/stft.hpp"
#include "fibersense/das/stream.hpp"

namespace fibersense::analysis {

std::string_view to_string(CorrelationMethod m) { return m == CorrelationMethod::pearson ? "pearson" : "spearman"; }

CorrelationMethod correlation_method_from_string(std::string_view s) {
  if (s == "pearson") return CorrelationMethod::pearson;
  if (s == "spearman") return CorrelationMethod::spearman;
  throw ConfigError(fmt::format("unknown correlation method '{}' (expected pearson or spearman)", s));
}

core::Series wind_on_sim_clock(const scenario::Scenario& sc, const core::TimeGrid& sim_grid) {
  const scenario::WindField wind(sc.wind);
  core::Series out{sim_grid, std::vector<double>(sim_grid.count), core::Unit::meters_per_second};
  for (std::size_t i = 0; i < sim_grid.count; ++i) {
    const auto t = sc.timeline.to_wind_clock(sim_grid.at(i));
    const auto v = wind.speed_at(t);
    if (!v) throw InvalidArgument(fmt::format("no wind coverage at {}", core::format_utc(t)));
    out.values[i] = *v;
  }
  return out;
}

core::Series segment_mean(const core::Waterfall& w, double start_m, double end_m) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < w.cols(); ++c) {
    const double x = w.position.at(c);
    if (x >= start_m - 1e-9 && x <= end_m + 1e-9) cols.push_back(c);
  }
  if (cols.empty()) {
    throw InvalidArgument(fmt::format("segment [{}, {}] m holds no waterfall column", start_m, end_m));
  }
  core::Series s{w.time, std::vector<double>(w.rows()), w.unit};
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c : cols) sum += w(r, c);
    s.values[r] = sum / static_cast<double>(cols.size());
  }
  return s;
}

namespace {

// Linear interpolation of a uniformly sampled series at absolute time t;
// nullopt outside its span.
std::optional<double> sample_at(const core::Series& s, core::UtcTime t) {
  const double u = core::seconds_between(s.time.t0, t) / s.time.dt_s;
  const double last = static_cast<double>(s.time.count - 1);
  if (u < -1e-9 || u > last + 1e-9) return std::nullopt;
  const double c = std::clamp(u, 0.0, last);
  const auto i = static_cast<std::size_t>(std::floor(c));
  if (i + 1 >= s.time.count) return s.values[s.time.count - 1];
  const double f = c - static_cast<double>(i);
  return (1.0 - f) * s.values[i] + f * s.values[i + 1];
}

}  // namespace

double correlate_wind_activity(const core::Series& wind, const core::Waterfall& das_std, double start_m,
                               double end_m, CorrelationMethod method) {
  const core::Series activity = segment_mean(das_std, start_m, end_m);
  const bool wind_coarser = wind.time.dt_s >= activity.time.dt_s;
  const core::Series& coarse = wind_coarser ? wind : activity;
  const core::Series& fine = wind_coarser ? activity : wind;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < coarse.time.count; ++i) {
    const auto v = sample_at(fine, coarse.time.at(i));
    if (!v) continue;
    a.push_back(coarse.values[i]);
    b.push_back(*v);
  }
  if (a.size() < 3) {
    throw InvalidArgument(fmt::format("correlate_wind_activity: only {} overlapping samples", a.size()));
  }
  return method == CorrelationMethod::pearson ? core::pearson(a, b) : core::spearman(a, b);
}

std::vector<ToneDetection> find_tones(const core::Waterfall& spectrogram, double lo_hz, double hi_hz,
                                      double prominence_db, const ToneSearchOptions& opt) {
  const core::PositionGrid& f = spectrogram.position;
  if (!(lo_hz < hi_hz) || lo_hz < 0.0 || hi_hz > f.end_m() + 1e-9) {
    throw InvalidArgument(fmt::format("find_tones: band [{}, {}] Hz outside the spectrogram range [0, {}] Hz", lo_hz,
                                      hi_hz, f.end_m()));
  }
  const std::size_t r0 = std::min(opt.row_begin, spectrogram.rows());
  const std::size_t r1 = std::min(opt.row_end, spectrogram.rows());
  if (r0 >= r1) throw InvalidArgument("find_tones: empty row range");
  const std::vector<double> avg = core::time_averaged_db(spectrogram, r0, r1);

  const double margin = opt.floor_margin_hz >= 0.0 ? opt.floor_margin_hz : 2.0 * (hi_hz - lo_hz);
  std::vector<double> floor_band;
  for (std::size_t k = 0; k < f.count; ++k) {
    const double fk = f.at(k);
    if (fk >= lo_hz - margin && fk <= hi_hz + margin) floor_band.push_back(avg[k]);
  }
  const double floor_db = core::median(floor_band);

  std::vector<ToneDetection> out;
  for (std::size_t k = 1; k + 1 < f.count; ++k) {
    const double fk = f.at(k);
    if (fk < lo_hz || fk > hi_hz) continue;
    if (!(avg[k] > avg[k - 1] && avg[k] >= avg[k + 1])) continue;
    const double prominence = avg[k] - floor_db;
    if (prominence < prominence_db) continue;
    // Parabolic refinement of the peak on the dB values.
    const double den = avg[k - 1] - 2.0 * avg[k] + avg[k + 1];
    const double delta = den < 0.0 ? std::clamp(0.5 * (avg[k - 1] - avg[k + 1]) / den, -0.5, 0.5) : 0.0;
    ToneDetection d;
    d.freq_hz = fk + delta * f.spacing_m;
    d.begin = spectrogram.time.at(r0);
    d.end = spectrogram.time.at(r1 - 1);
    d.prominence_db = prominence;
    out.push_back(d);
  }
  return out;
}

core::Profile localize_tone(const das::PhaseRecord& record, const das::DasConfig& cfg, double freq_hz,
                            std::size_t first_frame, std::size_t frame_count) {
  const core::Waterfall& p = record.phase;
  if (!(freq_hz < 0.5 * p.time.rate_hz())) throw InvalidArgument("localize_tone: frequency at or above Nyquist");
  if (first_frame >= p.rows()) throw InvalidArgument("localize_tone: first frame beyond the record");
  const std::size_t count = std::min(frame_count, p.rows() - first_frame);
  das::StrainRecovery rec(p.cols(), cfg);
  std::vector<float> strain(p.values.size());
  rec.process(p.values, strain);
  das::ToneLocalizer loc(p.cols(), freq_hz, p.time.rate_hz(), first_frame, count);
  loc.push(0, strain);
  core::Profile out = core::Profile::filled(p.position, 0.0, core::Unit::dimensionless);
  out.values = loc.power();
  return out;
}

std::vector<HotSpan> hot_spans(const core::Waterfall& das_std, double hot_fraction) {
  if (!(hot_fraction > 0.0 && hot_fraction <= 1.0)) throw InvalidArgument("hot_spans: hot_fraction must be in (0, 1]");
  const std::size_t nc = das_std.cols();
  std::vector<double> col_max(nc, 0.0);
  std::vector<std::size_t> col_row(nc, 0);
  for (std::size_t r = 0; r < das_std.rows(); ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      if (das_std(r, c) > col_max[c]) {
        col_max[c] = das_std(r, c);
        col_row[c] = r;
      }
    }
  }
  const double global = nc ? *std::max_element(col_max.begin(), col_max.end()) : 0.0;
  std::vector<HotSpan> out;
  if (!(global > 0.0)) return out;
  const double thr = hot_fraction * global;
  const double half = 0.5 * das_std.position.spacing_m;
  for (std::size_t c = 0; c < nc;) {
    if (col_max[c] < thr) {
      ++c;
      continue;
    }
    std::size_t e = c;
    std::size_t best = c;
    while (e < nc && col_max[e] >= thr) {
      if (col_max[e] > col_max[best]) best = e;
      ++e;
    }
    HotSpan h;
    h.start_m = das_std.position.at(c) - half;
    h.end_m = das_std.position.at(e - 1) + half;
    h.peak_position_m = das_std.position.at(best);
    h.peak_value = col_max[best];
    h.peak_time = das_std.time.at(col_row[best]);
    out.push_back(h);
    c = e;
  }
  return out;
}

std::vector<StrainPeak> strain_peaks(const core::Profile& delta, double threshold) {
  std::vector<StrainPeak> out;
  const std::size_t n = delta.values.size();
  const double half = 0.5 * delta.position.spacing_m;
  for (std::size_t i = 0; i < n;) {
    if (!delta.is_valid(i) || delta.values[i] < threshold) {
      ++i;
      continue;
    }
    std::size_t e = i;
    std::size_t best = i;
    while (e < n && delta.is_valid(e) && delta.values[e] >= threshold) {
      if (delta.values[e] > delta.values[best]) best = e;
      ++e;
    }
    out.push_back(StrainPeak{delta.position.at(best), delta.values[best], delta.position.at(i) - half,
                             delta.position.at(e - 1) + half});
    i = e;
  }
  return out;
}

bool grids_consistent(const core::PositionGrid& a, const core::PositionGrid& b) {
  const double fine = std::min(a.spacing_m, b.spacing_m);
  const double coarse = std::max(a.spacing_m, b.spacing_m);
  const double ratio = coarse / fine;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio) return false;
  const double offset = (a.start_m - b.start_m) / fine;
  return std::abs(offset - std::round(offset)) <= 1e-6 * std::max(1.0, std::abs(offset));
}

}  // namespace fibersense::analysis
