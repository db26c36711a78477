#include "fibersense/scenario/field.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/parallel.hpp"
#include "fibersense/core/stats.hpp"

namespace fibersense::scenario {

using core::kTwoPi;

std::string_view to_string(Epoch e) {
  switch (e) {
    case Epoch::before: return "before";
    case Epoch::after: return "after";
    case Epoch::relaxed: return "relaxed";
  }
  return "before";
}

Epoch epoch_from_string(std::string_view s) {
  if (s == "before") return Epoch::before;
  if (s == "after") return Epoch::after;
  if (s == "relaxed") return Epoch::relaxed;
  throw ConfigError(fmt::format("unknown epoch '{}' (expected before, after or relaxed)", s));
}

const std::vector<double>& StrainField::static_profile(Epoch e) const {
  switch (e) {
    case Epoch::before: return static_before_ue;
    case Epoch::after: return static_after_ue;
    case Epoch::relaxed: return static_relaxed_ue;
  }
  return static_before_ue;
}

core::Waterfall StrainField::dynamic_waterfall() const {
  return core::Waterfall{time, position, core::AxisKind::position, core::Unit::nanostrain, dynamic_nstrain};
}

void StrainField::validate() const {
  position.validate();
  time.validate();
  if (dynamic_nstrain.size() != position.count * time.count) {
    throw InvalidArgument("strain field: dynamic matrix does not match its grids");
  }
  for (const auto* v : {&static_before_ue, &static_after_ue, &static_relaxed_ue, &temperature_delta_k}) {
    if (v->size() != position.count) throw InvalidArgument("strain field: static profile length mismatch");
  }
  for (float v : dynamic_nstrain) {
    if (!std::isfinite(v)) throw InvalidArgument("strain field: non-finite dynamic strain");
  }
}

double FieldSynthesizer::Node::next() {
  double v = rng.normal();
  if (use_highpass) v = highpass.step(v);
  if (use_lowpass) v = lowpass.step(v);
  return v;
}

namespace {

struct BandSetup {
  bool highpass = false;
  bool lowpass = false;
  double gain = 1.0;
};

// Unit-variance scaling for white noise through the band filters: the output
// variance is the energy of the cascade's impulse response.
BandSetup band_setup(double low_hz, double high_hz, double rate_hz) {
  BandSetup b;
  b.highpass = low_hz > 0.0 && low_hz < 0.45 * rate_hz;
  b.lowpass = high_hz < 0.45 * rate_hz;
  if (!b.highpass && !b.lowpass) return b;
  core::Biquad hp = b.highpass ? core::Biquad::butterworth_highpass(low_hz, rate_hz) : core::Biquad{};
  core::Biquad lp = b.lowpass ? core::Biquad::butterworth_lowpass(high_hz, rate_hz) : core::Biquad{};
  const double settle_s = 60.0 / (b.highpass ? low_hz : high_hz);
  const auto n = static_cast<std::size_t>(std::clamp(settle_s * rate_hz, 1000.0, 5e6));
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = i == 0 ? 1.0 : 0.0;
    if (b.highpass) v = hp.step(v);
    if (b.lowpass) v = lp.step(v);
    energy += v * v;
  }
  b.gain = 1.0 / std::sqrt(energy);
  return b;
}

}  // namespace

FieldSynthesizer::FieldSynthesizer(const Scenario& sc, core::PositionGrid position, core::TimeGrid time)
    : sc_(&sc), position_(position), time_(time), wind_(sc.wind) {
  position_.validate();
  time_.validate();
  const double length = sc.length_m();
  if (position_.start_m < -1e-6 || position_.end_m() > length + 1e-6) {
    throw InvalidArgument(fmt::format("position grid [{}, {}] m exceeds the cable [0, {}] m", position_.start_m,
                                      position_.end_m(), length));
  }
  for (const auto t : {time_.t0, time_.end()}) {
    if (!wind_.speed_at(sc.timeline.to_wind_clock(t))) {
      throw InvalidArgument(fmt::format("simulation time {} maps outside the wind record", core::format_utc(t)));
    }
  }

  const auto& f = sc.forcing;
  const BandSetup band = band_setup(f.band_low_hz, f.band_high_hz, time_.rate_hz());
  noise_gain_ = band.gain;

  const double corr = f.correlation_length_m;
  const auto last_node = static_cast<std::size_t>(std::ceil(length / corr - 1e-9));
  const std::size_t top = std::max<std::size_t>(last_node, 1);
  auto node_of = [&](double x) {
    return std::min(static_cast<std::size_t>(std::max(0.0, std::floor(x / corr))), top - 1);
  };
  node_first_ = node_of(position_.start_m);
  const std::size_t node_last = node_of(position_.end_m()) + 1;

  const auto warmup = static_cast<std::size_t>(std::ceil(f.warmup_s * time_.rate_hz()));
  for (std::size_t k = node_first_; k <= node_last; ++k) {
    Node node{core::Rng(core::derive_seed(sc.seed, "field-node", k)),
              band.highpass ? core::Biquad::butterworth_highpass(f.band_low_hz, time_.rate_hz()) : core::Biquad{},
              band.lowpass ? core::Biquad::butterworth_lowpass(f.band_high_hz, time_.rate_hz()) : core::Biquad{},
              band.highpass, band.lowpass};
    for (std::size_t i = 0; i < warmup; ++i) node.next();
    nodes_.push_back(std::move(node));
  }

  std::vector<int> tone_of_segment(sc.segments.size(), -1);
  for (std::size_t s = 0; s < sc.segments.size(); ++s) {
    if (const auto& osc = sc.segments[s].oscillation) {
      core::Rng phase_rng(core::derive_seed(sc.seed, "field-tone", s));
      tone_of_segment[s] = static_cast<int>(tones_.size());
      tones_.push_back(Tone{osc->freq_hz, osc->amplitude_nstrain, kTwoPi * phase_rng.uniform(), osc->active_window});
    }
  }

  const std::size_t np = position_.count;
  coupling_.resize(np);
  node_a_.resize(np);
  weight_a_.resize(np);
  weight_b_.resize(np);
  tone_of_.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    const double x = std::clamp(position_.at(i), 0.0, length);
    const std::size_t seg = sc.segment_index(x);
    coupling_[i] = sc.segments[seg].coupling;
    tone_of_[i] = tone_of_segment[seg];
    const std::size_t ka = node_of(x);
    const double frac = std::clamp(x / corr - static_cast<double>(ka), 0.0, 1.0);
    const double norm = std::sqrt((1.0 - frac) * (1.0 - frac) + frac * frac);
    node_a_[i] = ka - node_first_;
    weight_a_[i] = (1.0 - frac) / norm;
    weight_b_[i] = frac / norm;
  }
}

std::vector<double> FieldSynthesizer::envelope(std::size_t first, std::size_t n) const {
  std::vector<double> env(n);
  const double calm = sc_->forcing.calm_threshold_mps;
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = sc_->timeline.to_wind_clock(time_.at(first + i));
    const auto v = wind_.speed_at(t);
    if (!v) throw InvalidArgument(fmt::format("no wind coverage at {}", core::format_utc(t)));
    env[i] = std::max(*v - calm, 0.0);
  }
  return env;
}

void FieldSynthesizer::advance(std::size_t n) {
  if (n > frames_remaining()) {
    throw InvalidArgument(fmt::format("requested {} frames, only {} remain", n, frames_remaining()));
  }
  const std::size_t nn = nodes_.size();
  node_buf_.resize(n * nn);
  for (std::size_t k = 0; k < nn; ++k) {
    for (std::size_t i = 0; i < n; ++i) node_buf_[i * nn + k] = nodes_[k].next() * noise_gain_;
  }
  env_buf_ = envelope(frame_, n);
  const std::size_t nt = tones_.size();
  tone_buf_.assign(n * nt, 0.0);
  const double origin = core::seconds_between(sc_->timeline.start, time_.t0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t_rel = origin + time_.offset_s(frame_ + i);
    const auto wind_t = sc_->timeline.to_wind_clock(time_.at(frame_ + i));
    for (std::size_t j = 0; j < nt; ++j) {
      const Tone& tone = tones_[j];
      if (tone.window && !tone.window->contains(wind_t)) continue;
      tone_buf_[i * nt + j] = tone.amplitude * std::sin(kTwoPi * tone.freq_hz * t_rel + tone.phase);
    }
  }
  frame_ += n;
}

void FieldSynthesizer::next_block(std::size_t n, std::span<float> out) {
  const std::size_t np = position_.count;
  if (out.size() < n * np) throw InvalidArgument("next_block: output buffer too small");
  advance(n);
  const std::size_t nn = nodes_.size();
  const std::size_t nt = tones_.size();
  core::parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double* node = node_buf_.data() + i * nn;
      const double env = env_buf_[i];
      float* row = out.data() + i * np;
      for (std::size_t x = 0; x < np; ++x) {
        const std::size_t a = node_a_[x];
        double v = coupling_[x] * env * (weight_a_[x] * node[a] + weight_b_[x] * node[a + 1]);
        if (tone_of_[x] >= 0) v += tone_buf_[i * nt + static_cast<std::size_t>(tone_of_[x])];
        row[x] = static_cast<float>(v);
      }
    }
  });
}

std::vector<std::vector<std::size_t>> span_members(const core::PositionGrid& grid, const std::vector<Span>& spans) {
  std::vector<std::vector<std::size_t>> out(spans.size());
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const bool last = s + 1 == spans.size();
    for (std::size_t i = 0; i < grid.count; ++i) {
      const double x = grid.at(i);
      if (x >= spans[s].start_m && (x < spans[s].end_m || (last && x <= spans[s].end_m))) out[s].push_back(i);
    }
    if (out[s].empty()) {
      const double mid = 0.5 * (spans[s].start_m + spans[s].end_m);
      const double idx = std::round((mid - grid.start_m) / grid.spacing_m);
      out[s].push_back(static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(grid.count - 1))));
    }
  }
  return out;
}

void FieldSynthesizer::set_spans(const std::vector<Span>& spans) {
  spans_ = spans;
  const std::size_t nn = nodes_.size();
  const std::size_t nt = tones_.size();
  span_node_w_.assign(spans.size() * nn, 0.0);
  span_tone_w_.assign(spans.size() * nt, 0.0);
  span_node_lo_.assign(spans.size(), nn);
  span_node_hi_.assign(spans.size(), 0);
  const auto members = span_members(position_, spans);
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const double w = 1.0 / static_cast<double>(members[s].size());
    for (const std::size_t i : members[s]) {
      span_node_w_[s * nn + node_a_[i]] += w * coupling_[i] * weight_a_[i];
      span_node_w_[s * nn + node_a_[i] + 1] += w * coupling_[i] * weight_b_[i];
      span_node_lo_[s] = std::min(span_node_lo_[s], node_a_[i]);
      span_node_hi_[s] = std::max(span_node_hi_[s], node_a_[i] + 2);
      if (tone_of_[i] >= 0) span_tone_w_[s * nt + static_cast<std::size_t>(tone_of_[i])] += w;
    }
  }
}

void FieldSynthesizer::next_span_means(std::size_t n, std::span<double> out) {
  const std::size_t ns = spans_.size();
  if (ns == 0) throw InvalidArgument("next_span_means: no spans set");
  if (out.size() < n * ns) throw InvalidArgument("next_span_means: output buffer too small");
  advance(n);
  const std::size_t nn = nodes_.size();
  const std::size_t nt = tones_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double* node = node_buf_.data() + i * nn;
    const double* tone = tone_buf_.data() + i * nt;
    for (std::size_t s = 0; s < ns; ++s) {
      const double* wn = span_node_w_.data() + s * nn;
      const double* wt = span_tone_w_.data() + s * nt;
      double noise = 0.0;
      for (std::size_t k = span_node_lo_[s]; k < span_node_hi_[s]; ++k) noise += wn[k] * node[k];
      double tones = 0.0;
      for (std::size_t j = 0; j < nt; ++j) tones += wt[j] * tone[j];
      out[i * ns + s] = env_buf_[i] * noise + tones;
    }
  }
}

std::vector<double> FieldSynthesizer::static_profile(Epoch e) const {
  std::vector<double> profile(position_.count, 0.0);
  if (e == Epoch::before) return profile;
  const double exceed = std::max(wind_.peak() - sc_->forcing.calm_threshold_mps, 0.0);
  const double keep = e == Epoch::after ? 1.0 : 1.0 - sc_->forcing.relaxation;
  for (std::size_t i = 0; i < position_.count; ++i) {
    const double x = std::clamp(position_.at(i), 0.0, sc_->length_m());
    profile[i] += keep * sc_->segments[sc_->segment_index(x)].static_gain * exceed;
  }
  return profile;
}

StrainField synthesize_field(const Scenario& sc, const core::PositionGrid& position, const core::TimeGrid& time) {
  FieldSynthesizer synth(sc, position, time);
  StrainField field;
  field.position = position;
  field.time = time;
  field.dynamic_nstrain.resize(position.count * time.count);
  synth.next_block(time.count, field.dynamic_nstrain);
  field.static_before_ue = synth.static_profile(Epoch::before);
  field.static_after_ue = synth.static_profile(Epoch::after);
  field.static_relaxed_ue = synth.static_profile(Epoch::relaxed);
  field.temperature_delta_k.assign(position.count, 0.0);
  return field;
}

core::Waterfall dynamic_block_std(FieldSynthesizer& synth, std::size_t block_t, std::size_t block_x) {
  const std::size_t np = synth.position().count;
  core::BlockStdAccumulator acc(np, block_t, block_x);
  std::vector<float> buf(block_t * np);
  while (synth.frames_remaining() >= block_t) {
    synth.next_block(block_t, buf);
    acc.push(buf);
  }
  return core::Waterfall{core::decimate(synth.time(), block_t), core::decimate(synth.position(), block_x),
                         core::AxisKind::position, core::Unit::nanostrain, acc.take()};
}

}  // namespace fibersense::scenario
