#include "fibersense/das/stream.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/parallel.hpp"

namespace fibersense::das {

ToneLocalizer::ToneLocalizer(std::size_t channels, double freq_hz, double rate_hz, std::size_t first_frame,
                             std::size_t frame_count)
    : channels_(channels), freq_hz_(freq_hz), first_(first_frame), count_(frame_count) {
  if (frame_count == 0) throw InvalidArgument("tone localizer: empty frame range");
  bins_.assign(channels, core::Goertzel(freq_hz, rate_hz));
}

void ToneLocalizer::push(std::size_t frame, std::span<const float> rows) {
  const std::size_t n = rows.size() / channels_;
  const std::size_t lo = std::max(frame, first_);
  const std::size_t hi = std::min(frame + n, first_ + count_);
  if (lo >= hi) return;
  core::parallel_for(channels_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      for (std::size_t f = lo; f < hi; ++f) bins_[c].push(rows[(f - frame) * channels_ + c]);
    }
  });
  seen_ += hi - lo;
}

std::vector<double> ToneLocalizer::power() const {
  std::vector<double> p(channels_);
  for (std::size_t c = 0; c < channels_; ++c) p[c] = bins_[c].power();
  return p;
}

DasProcessor::DasProcessor(const core::PositionGrid& position, const core::TimeGrid& time, const DasConfig& cfg,
                           const DasStreamOptions& opt)
    : position_(position),
      time_(time),
      opt_(opt),
      recovery_(position.count, cfg),
      std_(position.count, opt.block_t, opt.block_x) {
  if (opt.block_t == 0 || opt.block_t > time.count || opt.block_x == 0 || opt.block_x > position.count) {
    throw InvalidArgument(fmt::format("das: block {} x {} does not fit a {} x {} record", opt.block_t, opt.block_x,
                                      time.count, position.count));
  }
  for (double x : opt.tap_positions_m) tap_channels_.push_back(position.nearest_index(x));
  taps_.resize(tap_channels_.size());
  for (auto& t : taps_) t.reserve(time.count);
  for (const ToneRequest& r : opt.tones) {
    if (r.first_frame + r.frame_count > time.count) {
      throw InvalidArgument(fmt::format("das: tone window [{}, {}) exceeds {} frames", r.first_frame,
                                        r.first_frame + r.frame_count, time.count));
    }
    tones_.emplace_back(position.count, r.freq_hz, time.rate_hz(), r.first_frame, r.frame_count);
  }
}

void DasProcessor::push_phase(std::span<const float> rows) {
  const std::size_t cols = position_.count;
  const std::size_t n = rows.size() / cols;
  if (frame_ + n > time_.count) throw InvalidArgument("das: more frames than the time grid holds");
  strain_.resize(rows.size());
  recovery_.process(rows, strain_);
  std_.push(strain_);
  for (std::size_t k = 0; k < tap_channels_.size(); ++k) {
    for (std::size_t r = 0; r < n; ++r) taps_[k].push_back(strain_[r * cols + tap_channels_[k]]);
  }
  for (auto& t : tones_) t.push(frame_, strain_);
  frame_ += n;
}

DasStreamResult DasProcessor::finish() {
  if (frame_ != time_.count) {
    throw InvalidArgument(fmt::format("das: record ended after {} of {} frames", frame_, time_.count));
  }
  DasStreamResult res;
  res.std_nstrain = core::Waterfall{core::decimate(time_, opt_.block_t), core::decimate(position_, opt_.block_x),
                                    core::AxisKind::position, core::Unit::nanostrain, std_.take()};
  for (auto& t : taps_) res.taps.push_back(core::Series{time_, std::move(t), core::Unit::nanostrain});
  for (const auto& t : tones_) {
    core::Profile p = core::Profile::filled(position_, 0.0, core::Unit::dimensionless);
    p.values = t.power();
    res.tone_power.push_back(std::move(p));
  }
  return res;
}

DasStreamResult run_das_stream(scenario::FieldSynthesizer& synth, const DasConfig& cfg, const DasStreamOptions& opt,
                               core::ArrayWriter* phase_sink) {
  const core::PositionGrid& pos = synth.position();
  const core::TimeGrid& time = synth.time();
  if (std::abs(pos.spacing_m - cfg.sample_spacing_m) > 1e-9 * cfg.sample_spacing_m) {
    throw InvalidArgument(fmt::format("das: field spacing {} m differs from the configured {} m", pos.spacing_m,
                                      cfg.sample_spacing_m));
  }
  if (synth.frames_emitted() != 0) throw InvalidArgument("das: synthesizer already advanced");
  PhaseSimulator sim(pos.count, cfg);
  DasProcessor proc(pos, time, cfg, opt);
  std::optional<core::BlockStdAccumulator> truth;
  if (opt.truth_std) truth.emplace(pos.count, opt.block_t, opt.block_x);

  const std::size_t chunk = std::max<std::size_t>(opt.chunk_frames, 1);
  std::vector<float> field(chunk * pos.count);
  std::vector<float> phase(chunk * pos.count);
  while (synth.frames_remaining() > 0) {
    const std::size_t n = std::min(chunk, synth.frames_remaining());
    const std::span<float> f(field.data(), n * pos.count);
    const std::span<float> p(phase.data(), n * pos.count);
    synth.next_block(n, f);
    if (truth) truth->push(f);
    sim.process(f, p);
    if (phase_sink) phase_sink->write_rows(p);
    proc.push_phase(p);
  }
  DasStreamResult res = proc.finish();
  if (truth) {
    res.truth_std_nstrain = core::Waterfall{core::decimate(time, opt.block_t), core::decimate(pos, opt.block_x),
                                            core::AxisKind::position, core::Unit::nanostrain, truth->take()};
  }
  return res;
}

DasStreamResult process_phase_file(core::ArrayReader& reader, const DasConfig& cfg, const DasStreamOptions& opt) {
  const core::ArrayHeader& h = reader.header();
  if (h.kind != "waterfall" || h.unit != core::Unit::radian) {
    throw FormatError(fmt::format("expected a phase record (waterfall in radians), found {} in {}", h.kind,
                                  core::to_string(h.unit)));
  }
  const core::TimeGrid time = h.rows.as_time();
  const core::PositionGrid pos = h.cols.as_positions();
  DasProcessor proc(pos, time, cfg, opt);
  const std::size_t chunk = std::max<std::size_t>(opt.chunk_frames, 1);
  std::vector<float> rows;
  while (reader.rows_remaining() > 0) {
    reader.read_rows(chunk, rows);
    proc.push_phase(rows);
  }
  return proc.finish();
}

core::ArrayHeader phase_header(const core::PositionGrid& position, const core::TimeGrid& time, const DasConfig& cfg) {
  core::ArrayHeader h;
  h.kind = "waterfall";
  h.unit = core::Unit::radian;
  h.rows = core::Axis::from_time(time);
  h.cols = core::Axis::from_positions(position);
  h.meta = {{"content", "das_phase"},
            {"das",
             {{"gauge_length_m", cfg.gauge_length_m},
              {"prf_hz", cfg.prf_hz},
              {"sample_spacing_m", cfg.sample_spacing_m},
              {"pulse_width_ns", cfg.pulse_width_ns},
              {"wavelength_nm", cfg.wavelength_nm},
              {"group_index", cfg.group_index},
              {"strain_phase_coeff", cfg.strain_phase_coeff},
              {"phase_noise_std_rad", cfg.phase_noise_std_rad},
              {"seed", cfg.seed}}}};
  return h;
}

DasConfig config_from_header(const core::ArrayHeader& header) {
  if (!header.meta.contains("das")) throw FormatError("phase record header lacks the 'das' settings");
  const auto& j = header.meta.at("das");
  DasConfig cfg;
  try {
    cfg.gauge_length_m = j.at("gauge_length_m").get<double>();
    cfg.prf_hz = j.at("prf_hz").get<double>();
    cfg.sample_spacing_m = j.at("sample_spacing_m").get<double>();
    cfg.pulse_width_ns = j.at("pulse_width_ns").get<double>();
    cfg.wavelength_nm = j.at("wavelength_nm").get<double>();
    cfg.group_index = j.at("group_index").get<double>();
    cfg.strain_phase_coeff = j.at("strain_phase_coeff").get<double>();
    cfg.phase_noise_std_rad = j.at("phase_noise_std_rad").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("phase record header: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

}  // namespace fibersense::das
