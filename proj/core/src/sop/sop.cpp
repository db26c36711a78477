#include "fibersense/sop/sop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/filters.hpp"
#include "fibersense/core/parallel.hpp"
#include "fibersense/core/rng.hpp"
#include "fibersense/core/stats.hpp"

namespace fibersense::sop {

using core::kTwoPi;

namespace {

double norm(const Stokes& s) { return std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]); }

}  // namespace

void SopConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sop: sample_rate_hz must be positive");
  if (!(highpass_corner_hz > 0.0) || highpass_corner_hz >= 0.5 * sample_rate_hz) {
    throw InvalidArgument("sop: highpass_corner_hz must lie in (0, fs/2)");
  }
  if (n_plates < 1) throw InvalidArgument("sop: n_plates must be at least 1");
  if (!std::isfinite(strain_to_retardance) || !std::isfinite(rotation_drift_rad_s)) {
    throw InvalidArgument("sop: retardance coefficients must be finite");
  }
  if (!(detector_noise_std >= 0.0)) throw InvalidArgument("sop: detector_noise_std must be non-negative");
  if (!(pdl_db >= 0.0) || !std::isfinite(pdl_db)) throw InvalidArgument("sop: pdl_db must be non-negative");
  if (!(total_power > 0.0)) throw InvalidArgument("sop: total_power must be positive");
  if (std::abs(norm(input_state) - 1.0) > 1e-9) throw InvalidArgument("sop: input_state must be a unit vector");
}

std::vector<Plate> plate_layout(const scenario::Scenario& sc, const SopConfig& cfg) {
  cfg.validate();
  const std::size_t ns = sc.segments.size();
  if (cfg.n_plates < ns) {
    throw InvalidArgument(fmt::format("sop: {} plates cannot cover {} segments", cfg.n_plates, ns));
  }
  const double length = sc.length_m();
  // Largest-remainder apportionment with a floor of one element per segment.
  std::vector<std::size_t> count(ns, 1);
  const std::size_t spare = cfg.n_plates - ns;
  std::vector<double> share(ns);
  std::size_t given = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    share[s] = static_cast<double>(spare) * sc.segments[s].length_m() / length;
    const auto whole = static_cast<std::size_t>(std::floor(share[s]));
    count[s] += whole;
    given += whole;
    share[s] -= static_cast<double>(whole);
  }
  std::vector<std::size_t> order(ns);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return share[a] > share[b]; });
  for (std::size_t k = 0; given < spare; ++k, ++given) ++count[order[k % ns]];

  std::vector<Plate> plates;
  plates.reserve(cfg.n_plates);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& seg = sc.segments[s];
    const double w = seg.length_m() / static_cast<double>(count[s]);
    for (std::size_t k = 0; k < count[s]; ++k) {
      core::Rng rng(core::derive_seed(cfg.seed, "sop-plate", plates.size()));
      const double theta = kTwoPi * rng.uniform();
      Plate p;
      p.start_m = seg.start_m + w * static_cast<double>(k);
      p.end_m = k + 1 == count[s] ? seg.end_m : seg.start_m + w * static_cast<double>(k + 1);
      p.axis = {std::cos(theta), std::sin(theta), 0.0};
      p.base_retardance = kTwoPi * rng.uniform();
      plates.push_back(p);
    }
  }
  return plates;
}

Stokes rotate(const Stokes& s, const Stokes& k, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  const double dot = k[0] * s[0] + k[1] * s[1] + k[2] * s[2];
  const Stokes cross{k[1] * s[2] - k[2] * s[1], k[2] * s[0] - k[0] * s[2], k[0] * s[1] - k[1] * s[0]};
  Stokes out;
  for (int i = 0; i < 3; ++i) out[i] = s[i] * c + cross[i] * sn + k[i] * dot * (1.0 - c);
  return out;
}

Cascade::Cascade(std::vector<Plate> plates, const SopConfig& cfg) : plates_(std::move(plates)), cfg_(cfg) {
  cfg_.validate();
  if (plates_.empty()) throw InvalidArgument("sop: cascade needs at least one plate");
}

Stokes Cascade::propagate_retardance(std::span<const double> retardance) const {
  if (retardance.size() != plates_.size()) throw InvalidArgument("sop: one retardance per plate is required");
  Stokes s = cfg_.input_state;
  for (std::size_t i = 0; i < plates_.size(); ++i) s = rotate(s, plates_[i].axis, retardance[i]);
  return s;
}

Stokes Cascade::propagate(std::span<const double> plate_strain, double t_s) const {
  if (plate_strain.size() != plates_.size()) throw InvalidArgument("sop: one strain per plate is required");
  Stokes s = cfg_.input_state;
  for (std::size_t i = 0; i < plates_.size(); ++i) {
    const double r =
        plates_[i].base_retardance + cfg_.rotation_drift_rad_s * t_s + cfg_.strain_to_retardance * plate_strain[i];
    s = rotate(s, plates_[i].axis, r);
  }
  return s;
}

namespace {

std::vector<scenario::Span> spans_of(const std::vector<Plate>& plates) {
  std::vector<scenario::Span> spans;
  spans.reserve(plates.size());
  for (const auto& p : plates) spans.push_back({p.start_m, p.end_m});
  return spans;
}

}  // namespace

StateSeries propagate_polarization(const scenario::StrainField& field, const std::vector<Plate>& plates,
                                   const SopConfig& cfg) {
  const Cascade cascade(plates, cfg);
  const auto members = scenario::span_members(field.position, spans_of(plates));
  StateSeries out{field.time, std::vector<Stokes>(field.time.count)};
  std::vector<double> strain(plates.size());
  for (std::size_t t = 0; t < field.time.count; ++t) {
    for (std::size_t p = 0; p < plates.size(); ++p) {
      double sum = 0.0;
      for (std::size_t i : members[p]) sum += field.dynamic(t, i);
      strain[p] = 1e-9 * sum / static_cast<double>(members[p].size());
    }
    out.states[t] = cascade.propagate(strain, field.time.offset_s(t));
  }
  return out;
}

StateSeries propagate_polarization(scenario::FieldSynthesizer& synth, const std::vector<Plate>& plates,
                                   const SopConfig& cfg, std::size_t chunk_frames) {
  const Cascade cascade(plates, cfg);
  synth.set_spans(spans_of(plates));
  const core::TimeGrid time = synth.time();
  StateSeries out{time, std::vector<Stokes>(time.count)};
  const std::size_t np = plates.size();
  const std::size_t chunk = std::max<std::size_t>(chunk_frames, 1);
  std::vector<double> means(chunk * np);
  std::vector<double> strain(np);
  std::size_t frame = synth.frames_emitted();
  while (synth.frames_remaining() > 0) {
    const std::size_t n = std::min(chunk, synth.frames_remaining());
    synth.next_span_means(n, means);
    for (std::size_t i = 0; i < n; ++i, ++frame) {
      for (std::size_t p = 0; p < np; ++p) strain[p] = 1e-9 * means[i * np + p];
      out.states[frame] = cascade.propagate(strain, time.offset_s(frame));
    }
  }
  return out;
}

void SopTrace::validate() const {
  time.validate();
  if (px.size() != time.count || py.size() != time.count) throw InvalidArgument("sop trace: channel length mismatch");
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!std::isfinite(px[i]) || !std::isfinite(py[i])) throw InvalidArgument("sop trace: non-finite sample");
  }
}

SopTrace detect(const StateSeries& states, const SopConfig& cfg) {
  cfg.validate();
  if (states.states.empty()) throw InvalidArgument("sop: empty state series");
  const double in_rate = states.time.rate_hz();
  const std::size_t n_in = states.states.size();
  const auto n_out =
      static_cast<std::size_t>(std::floor(states.time.duration_s() * cfg.sample_rate_hz + 1e-9)) + 1;
  SopTrace trace{core::TimeGrid{states.time.t0, 1.0 / cfg.sample_rate_hz, n_out}, std::vector<float>(n_out),
                 std::vector<float>(n_out), cfg.detector_noise_std * cfg.total_power};
  const double lin = std::pow(10.0, cfg.pdl_db / 10.0);
  const double pdl = (lin - 1.0) / (lin + 1.0);
  const double sigma = cfg.detector_noise_std * cfg.total_power;
  core::parallel_for(2, [&](std::size_t begin, std::size_t end) {
    for (std::size_t ch = begin; ch < end; ++ch) {
      const double sign = ch == 0 ? 1.0 : -1.0;
      core::Rng rng(core::derive_seed(cfg.seed, "sop-detector", ch));
      core::FirstOrderHighPass hp(cfg.highpass_corner_hz, cfg.sample_rate_hz);
      std::vector<float>& out = ch == 0 ? trace.px : trace.py;
      for (std::size_t j = 0; j < n_out; ++j) {
        const double u = static_cast<double>(j) * in_rate / cfg.sample_rate_hz;
        const auto i = std::min(static_cast<std::size_t>(u), n_in - 1);
        const double f = i + 1 < n_in ? u - static_cast<double>(i) : 0.0;
        const Stokes& a = states.states[i];
        const Stokes& b = states.states[std::min(i + 1, n_in - 1)];
        Stokes s{(1.0 - f) * a[0] + f * b[0], (1.0 - f) * a[1] + f * b[1], (1.0 - f) * a[2] + f * b[2]};
        const double nn = norm(s);
        if (nn > 0.0) s = {s[0] / nn, s[1] / nn, s[2] / nn};
        const double power = cfg.total_power * (1.0 + pdl * s[1]);
        double v = 0.5 * power * (1.0 + sign * s[0]);
        if (sigma > 0.0) v += sigma * rng.normal();
        out[j] = static_cast<float>(hp.step(v));
      }
    }
  });
  return trace;
}

StokesSeries stokes_rms(const SopTrace& trace, double window_s) {
  if (trace.px.empty()) throw InvalidArgument("stokes_rms: empty trace");
  const auto w = static_cast<std::size_t>(std::llround(window_s * trace.time.rate_hz()));
  if (w < 10) throw InvalidArgument(fmt::format("stokes_rms: window of {} samples is below 10", w));
  if (w > trace.px.size()) throw InvalidArgument("stokes_rms: window longer than the trace");
  const std::size_t nw = trace.px.size() / w;
  StokesSeries out{core::Series{core::decimate(trace.time, w), std::vector<double>(nw), core::Unit::dimensionless},
                   std::vector<std::uint8_t>(nw)};
  const double floor = 2.0 * trace.detector_noise_std;
  core::parallel_for(nw, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t j = k * w; j < (k + 1) * w; ++j) {
        sx += static_cast<double>(trace.px[j]) * trace.px[j];
        sy += static_cast<double>(trace.py[j]) * trace.py[j];
      }
      const double rx = std::sqrt(sx / static_cast<double>(w));
      const double ry = std::sqrt(sy / static_cast<double>(w));
      const double s0 = rx + ry;
      out.s1_norm.values[k] = s0 > 0.0 ? (rx - ry) / s0 : 0.0;
      out.valid[k] = s0 > floor && s0 > 0.0 ? 1 : 0;
    }
  });
  return out;
}

double fluctuation_magnitude(const StokesSeries& s, core::UtcTime begin, core::UtcTime end) {
  std::vector<double> v;
  for (std::size_t k = 0; k < s.s1_norm.values.size(); ++k) {
    const auto t = s.s1_norm.time.at(k);
    if (t >= begin && t < end) v.push_back(s.s1_norm.values[k]);
  }
  if (v.size() < 2) throw InvalidArgument("fluctuation_magnitude: fewer than two windows in range");
  return core::population_std(v);
}

core::Series decimated_difference(const SopTrace& trace, double max_rate_hz) {
  if (trace.px.empty()) throw InvalidArgument("sop: empty trace");
  const auto d = static_cast<std::size_t>(std::ceil(trace.time.rate_hz() / max_rate_hz - 1e-9));
  const std::size_t factor = std::max<std::size_t>(d, 1);
  const std::size_t n = trace.px.size() / factor;
  if (n == 0) throw InvalidArgument("sop: trace shorter than one decimation block");
  core::Series out{core::decimate(trace.time, factor), std::vector<double>(n), core::Unit::power};
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (std::size_t j = k * factor; j < (k + 1) * factor; ++j) {
      sum += static_cast<double>(trace.px[j]) - static_cast<double>(trace.py[j]);
    }
    out.values[k] = sum / static_cast<double>(factor);
  }
  return out;
}

core::Waterfall sop_spectrogram(const SopTrace& trace, const core::StftOptions& opt) {
  return core::stft_spectrogram(decimated_difference(trace), opt);
}

void write_sop_trace(const std::filesystem::path& path, const SopTrace& trace, const nlohmann::json& meta) {
  trace.validate();
  core::ArrayHeader h;
  h.kind = "sop_trace";
  h.unit = core::Unit::power;
  h.rows = core::Axis::from_time(trace.time);
  h.cols = core::Axis{"channel", 0.0, 1.0, 2, std::nullopt};
  h.meta = meta;
  h.meta["detector_noise_std"] = trace.detector_noise_std;
  core::ArrayWriter w(path, h);
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<float> buf;
  for (std::size_t i = 0; i < trace.px.size(); i += kChunk) {
    const std::size_t n = std::min(kChunk, trace.px.size() - i);
    buf.resize(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      buf[2 * j] = trace.px[i + j];
      buf[2 * j + 1] = trace.py[i + j];
    }
    w.write_rows(buf);
  }
  w.finish();
}

SopTrace read_sop_trace(const std::filesystem::path& path, nlohmann::json* meta_out) {
  core::ArrayReader r(path);
  const core::ArrayHeader& h = r.header();
  if (h.kind != "sop_trace" || h.cols.count != 2) {
    throw FormatError(fmt::format("'{}': expected a two-channel sop_trace, found '{}'", path.string(), h.kind));
  }
  SopTrace t;
  t.time = h.rows.as_time();
  t.detector_noise_std = h.meta.value("detector_noise_std", 0.0);
  t.px.reserve(t.time.count);
  t.py.reserve(t.time.count);
  std::vector<float> buf;
  while (r.rows_remaining() > 0) {
    const std::size_t n = r.read_rows(1 << 16, buf);
    for (std::size_t j = 0; j < n; ++j) {
      t.px.push_back(buf[2 * j]);
      t.py.push_back(buf[2 * j + 1]);
    }
  }
  if (meta_out) *meta_out = h.meta;
  return t;
}

}  // namespace fibersense::sop
