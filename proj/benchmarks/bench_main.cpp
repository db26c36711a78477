#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "fibersense/botdr/botdr.hpp"
#include "fibersense/core/rng.hpp"
#include "fibersense/core/stats.hpp"
#include "fibersense/core/stft.hpp"
#include "fibersense/das/das.hpp"
#include "fibersense/scenario/field.hpp"
#include "fibersense/sop/sop.hpp"

using namespace fibersense;

namespace {

constexpr std::size_t kChannels = 2001;  // 20 km at 10 m
const core::UtcTime kT0 = core::parse_utc("2025-08-04T00:00:00Z");

std::vector<float> random_rows(std::size_t n, double scale, std::uint64_t seed) {
  core::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(scale * rng.normal());
  return v;
}

void BM_GaugeAverage(benchmark::State& state) {
  const auto row = random_rows(kChannels, 1.0, 1);
  std::vector<double> out(kChannels);
  for (auto _ : state) {
    das::gauge_average(row, 4, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * kChannels);
}
BENCHMARK(BM_GaugeAverage);

// one second of frames at the reference PRF
void BM_PhaseSimulator(benchmark::State& state) {
  das::DasConfig cfg;
  cfg.phase_noise_std_rad = 0.02;
  das::PhaseSimulator sim(kChannels, cfg);
  const auto strain = random_rows(600 * kChannels, 2.0, 2);
  std::vector<float> phase(strain.size());
  for (auto _ : state) {
    sim.process(strain, phase);
    benchmark::DoNotOptimize(phase.data());
  }
  state.SetItemsProcessed(state.iterations() * strain.size());
}
BENCHMARK(BM_PhaseSimulator)->Unit(benchmark::kMillisecond);

void BM_StrainRecovery(benchmark::State& state) {
  const das::DasConfig cfg;
  das::StrainRecovery rec(kChannels, cfg);
  auto phase = random_rows(600 * kChannels, 1.0, 3);
  for (auto& p : phase) p = das::wrap_phase_float(p);
  std::vector<float> strain(phase.size());
  for (auto _ : state) {
    rec.process(phase, strain);
    benchmark::DoNotOptimize(strain.data());
  }
  state.SetItemsProcessed(state.iterations() * phase.size());
}
BENCHMARK(BM_StrainRecovery)->Unit(benchmark::kMillisecond);

void BM_FieldSynthesis(benchmark::State& state) {
  const auto sc = scenario::load_scenario(FIBERSENSE_BENCH_DATA "/scenario.json");
  const auto pos = core::PositionGrid::covering(0.0, 20000.0, 10.0);
  const auto time = core::TimeGrid::at_rate(sc.timeline.start, 600.0, 1800.0);
  scenario::FieldSynthesizer synth(sc, pos, time);
  std::vector<float> block(600 * pos.count);
  for (auto _ : state) {
    if (synth.frames_remaining() < 600) {
      state.PauseTiming();
      synth = scenario::FieldSynthesizer(sc, pos, time);
      state.ResumeTiming();
    }
    synth.next_block(600, block);
    benchmark::DoNotOptimize(block.data());
  }
  state.SetItemsProcessed(state.iterations() * block.size());
}
BENCHMARK(BM_FieldSynthesis)->Unit(benchmark::kMillisecond);

void BM_WindowedStd(benchmark::State& state) {
  auto w = core::Waterfall::zeros(core::TimeGrid::make(kT0, 1.0 / 600, 6000), core::PositionGrid::make(0, 10, 200),
                                  core::Unit::nanostrain);
  w.values = random_rows(w.values.size(), 1.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(core::windowed_std(w, 600, 1));
  state.SetItemsProcessed(state.iterations() * w.values.size());
}
BENCHMARK(BM_WindowedStd)->Unit(benchmark::kMillisecond);

void BM_LorentzianFit(benchmark::State& state) {
  const botdr::BotdrConfig cfg;
  const auto freq = botdr::scan_grid(cfg);
  core::Rng rng(5);
  std::vector<double> power(freq.size());
  for (std::size_t i = 0; i < freq.size(); ++i)
    power[i] = botdr::lorentzian(freq[i], 10.6337e9, cfg.linewidth_hz) + 0.01 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(botdr::fit_peak(freq, power));
}
BENCHMARK(BM_LorentzianFit);

void BM_Stft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n * 8);
  core::Rng rng(6);
  for (auto& v : x) v = rng.normal();
  const core::StftOptions opt{n, 0.5, core::WindowKind::hann};
  std::size_t frames = 0;
  for (auto _ : state) benchmark::DoNotOptimize(core::stft_power(x, opt, &frames));
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_Stft)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_Cascade(benchmark::State& state) {
  const auto sc = scenario::load_scenario(FIBERSENSE_BENCH_DATA "/scenario.json");
  const sop::SopConfig cfg;
  const sop::Cascade cascade(sop::plate_layout(sc, cfg), cfg);
  core::Rng rng(7);
  std::vector<double> strain(cascade.plates().size());
  for (auto& v : strain) v = 1e-9 * rng.normal();
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cascade.propagate(strain, t));
    t += 1.0 / 600;
  }
}
BENCHMARK(BM_Cascade);

}  // namespace

BENCHMARK_MAIN();
