#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/rng.hpp"
#include "fibersense/core/stats.hpp"
#include "fibersense/sop/sop.hpp"

using namespace fibersense;
using namespace fibersense::core;
using namespace fibersense::sop;

namespace {

const UtcTime kT0 = parse_utc("2025-08-04T00:00:00Z");

Eigen::Vector3d ev(const Stokes& s) { return {s[0], s[1], s[2]}; }

// oracle: the same cascade built from Eigen rotation matrices
Eigen::Vector3d eigen_cascade(const std::vector<Plate>& plates, const std::vector<double>& ret,
                              const Stokes& input) {
  Eigen::Vector3d s = ev(input);
  for (std::size_t i = 0; i < plates.size(); ++i) s = Eigen::AngleAxisd(ret[i], ev(plates[i].axis).normalized()) * s;
  return s;
}

std::vector<Plate> random_plates(std::size_t n, std::uint64_t seed, double length_m = 10000.0) {
  Rng rng(seed);
  std::vector<Plate> plates;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = kTwoPi * rng.uniform();
    plates.push_back({length_m * i / n, length_m * (i + 1) / n, {std::cos(th), std::sin(th), 0.0}, kTwoPi * rng.uniform()});
  }
  return plates;
}

scenario::StrainField field(std::size_t cols, double dx, double rate, double seconds) {
  scenario::StrainField f;
  f.position = PositionGrid::make(0, dx, cols);
  f.time = TimeGrid::at_rate(kT0, rate, seconds);
  f.dynamic_nstrain.assign(cols * f.time.count, 0.0f);
  f.static_before_ue.assign(cols, 0.0);
  f.static_after_ue = f.static_relaxed_ue = f.temperature_delta_k = f.static_before_ue;
  return f;
}

StateSeries s1_sine(double freq, double amp, double rate, double seconds) {
  StateSeries st{TimeGrid::at_rate(kT0, rate, seconds), {}};
  for (std::size_t i = 0; i < st.time.count; ++i) {
    const double s1 = amp * std::sin(kTwoPi * freq * st.time.offset_s(i));
    st.states.push_back({s1, std::sqrt(1.0 - s1 * s1), 0.0});
  }
  return st;
}

double amplitude_at(const std::vector<float>& x, double freq, double fs, std::size_t from) {
  double sc = 0, cc = 0;
  const auto periods = static_cast<std::size_t>(std::floor((x.size() - from) * freq / fs));
  const auto n = static_cast<std::size_t>(std::llround(periods * fs / freq));
  for (std::size_t i = from; i < from + n; ++i) {
    const double ph = kTwoPi * freq * static_cast<double>(i) / fs;
    sc += x[i] * std::sin(ph);
    cc += x[i] * std::cos(ph);
  }
  return 2.0 * std::hypot(sc, cc) / static_cast<double>(n);
}

double peak_hz(const Waterfall& spec, double lo, double hi) {
  const auto avg = time_averaged_db(spec, 0, spec.rows());
  double best = -1e300, f = 0;
  for (std::size_t c = 0; c < avg.size(); ++c) {
    const double hz = spec.position.at(c);
    if (hz >= lo && hz <= hi && avg[c] > best) best = avg[c], f = hz;
  }
  return f;
}

SopConfig quiet_cfg(double rate = 4410.0) {
  SopConfig cfg;
  cfg.sample_rate_hz = rate;
  cfg.detector_noise_std = 0.0;
  return cfg;
}

}  // namespace

TEST(Rotation, MatchesAxisAngle) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d k = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Eigen::Vector3d s = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const double a = (rng.uniform() - 0.5) * 20.0;
    const auto out = rotate({s[0], s[1], s[2]}, {k[0], k[1], k[2]}, a);
    ASSERT_LT((ev(out) - Eigen::AngleAxisd(a, k) * s).norm(), 1e-12);
  }
}

TEST(CascadeTest, HalfWaveMirrorsAndSquaresToIdentity) {
  const SopConfig cfg;
  const Cascade one({{0, 1, {1, 0, 0}, 0}}, cfg);
  const auto out = one.propagate_retardance(std::vector<double>{kPi});
  EXPECT_NEAR(out[0], 0.0, 1e-15);
  EXPECT_NEAR(out[1], -1.0, 1e-15);
  EXPECT_NEAR(out[2], 0.0, 1e-15);
  const Cascade two({{0, 1, {1, 0, 0}, 0}, {1, 2, {1, 0, 0}, 0}}, cfg);
  const auto back = two.propagate_retardance(std::vector<double>{kPi, kPi});
  EXPECT_LT((ev(back) - ev(cfg.input_state)).norm(), 1e-14);
}

TEST(CascadeTest, MatchesEigenProduct) {
  const auto plates = random_plates(64, 3);
  const SopConfig cfg;
  const Cascade c(plates, cfg);
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> ret;
    for (std::size_t i = 0; i < 64; ++i) ret.push_back(kTwoPi * rng.uniform());
    ASSERT_LT((ev(c.propagate_retardance(ret)) - eigen_cascade(plates, ret, cfg.input_state)).norm(), 1e-11);
  }
}

// d out / d delta_k = R_after (a_k x s_k): compare with finite differences.
TEST(CascadeTest, SmallPerturbationIsLinear) {
  const auto plates = random_plates(16, 5);
  const SopConfig cfg;
  const Cascade c(plates, cfg);
  std::vector<double> ret;
  for (const auto& p : plates) ret.push_back(p.base_retardance);
  const std::size_t k = 6;
  Eigen::Vector3d s = ev(cfg.input_state);
  for (std::size_t i = 0; i < k; ++i) s = Eigen::AngleAxisd(ret[i], ev(plates[i].axis)) * s;
  Eigen::Vector3d d = ev(plates[k].axis).cross(Eigen::AngleAxisd(ret[k], ev(plates[k].axis)) * s);
  for (std::size_t i = k + 1; i < plates.size(); ++i) d = Eigen::AngleAxisd(ret[i], ev(plates[i].axis)) * d;
  ASSERT_GT(d.norm(), 0.05);
  const auto base = ev(c.propagate_retardance(ret));
  for (double delta : {1e-2, 3e-3, 1e-3}) {
    auto r2 = ret;
    r2[k] += delta;
    const Eigen::Vector3d disp = ev(c.propagate_retardance(r2)) - base;
    EXPECT_NEAR(disp.norm(), delta * d.norm(), 0.1 * delta * d.norm());
    EXPECT_GT(disp.normalized().dot(d.normalized()), 0.99);
  }
}

TEST(CascadeTest, NormPreserved) {
  const auto plates = random_plates(64, 6);
  SopConfig cfg;
  cfg.rotation_drift_rad_s = 0.3;
  const Cascade c(plates, cfg);
  Rng rng(7);
  std::vector<double> strain(64);
  double worst = 0;
  for (int t = 0; t < 100000; ++t) {
    for (auto& v : strain) v = 1e-8 * rng.normal();
    const auto s = c.propagate(strain, t * 1e-3);
    worst = std::max(worst, std::abs(std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) - 1.0));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Propagate, ZeroFieldIsConstant) {
  const auto f = field(100, 100, 50, 20);
  const auto st = propagate_polarization(f, random_plates(8, 1), SopConfig{});
  for (const auto& s : st.states) ASSERT_EQ(s, st.states.front());
}

TEST(Layout, FollowsSegments) {
  scenario::Scenario sc;
  sc.segments = {{"a", 0, 500, scenario::SegmentKind::onshore, 0, 0, std::nullopt},
                 {"b", 500, 5000, scenario::SegmentKind::fjord, 0, 0, std::nullopt},
                 {"c", 5000, 118000, scenario::SegmentKind::offshore, 0, 0, std::nullopt}};
  SopConfig cfg;
  const auto plates = plate_layout(sc, cfg);
  ASSERT_EQ(plates.size(), 64u);
  EXPECT_DOUBLE_EQ(plates.front().start_m, 0.0);
  EXPECT_DOUBLE_EQ(plates.back().end_m, 118000.0);
  for (std::size_t i = 1; i < plates.size(); ++i) ASSERT_DOUBLE_EQ(plates[i].start_m, plates[i - 1].end_m);
  for (const auto& seg : sc.segments) {
    int inside = 0;
    for (const auto& p : plates) {
      ASSERT_FALSE(p.start_m < seg.start_m && p.end_m > seg.start_m) << "plate straddles " << seg.name;
      inside += p.start_m >= seg.start_m && p.end_m <= seg.end_m;
    }
    EXPECT_GE(inside, 1);
  }
  cfg.n_plates = 2;
  EXPECT_THROW(plate_layout(sc, cfg), InvalidArgument);
}

TEST(Detect, DcIsRemoved) {
  StateSeries st{TimeGrid::at_rate(kT0, 100, 5), std::vector<Stokes>(501, Stokes{1, 0, 0})};
  const auto tr = detect(st, quiet_cfg());
  EXPECT_NO_THROW(tr.validate());
  for (std::size_t i = tr.px.size() - 100; i < tr.px.size(); ++i) {
    ASSERT_NEAR(tr.px[i], 0.0, 1e-6);
    ASSERT_NEAR(tr.py[i], 0.0, 1e-6);
  }
}

TEST(Detect, HighPassResponseAt44k) {
  auto cfg = quiet_cfg(44100.0);
  cfg.pdl_db = 0.0;
  const double a = 0.5;
  // px carries P s1 / 2, so the unfiltered amplitude is a / 2
  const auto slow = detect(s1_sine(0.2, a, 1000.0, 40.0), cfg);
  EXPECT_NEAR(20 * std::log10(amplitude_at(slow.px, 0.2, 44100.0, 44100 * 15) / (a / 2)), -20.0, 0.5);
  const auto corner = detect(s1_sine(2.0, a, 1000.0, 10.0), cfg);
  EXPECT_NEAR(20 * std::log10(amplitude_at(corner.px, 2.0, 44100.0, 44100 * 3) / (a / 2)), -3.0, 0.3);
  EXPECT_NEAR(20 * std::log10(amplitude_at(corner.py, 2.0, 44100.0, 44100 * 3) / (a / 2)), -3.0, 0.3);
}

TEST(StokesRms, Symmetry) {
  SopTrace tr{TimeGrid::at_rate(kT0, 1000, 20), {}, {}, 0.0};
  Rng rng(3);
  for (std::size_t i = 0; i < tr.time.count; ++i) {
    tr.px.push_back(static_cast<float>(rng.normal()));
    tr.py.push_back(static_cast<float>(rng.normal()));
  }
  const auto s = stokes_rms(tr, 1.0);
  ASSERT_EQ(s.s1_norm.values.size(), 20u);
  for (double v : s.s1_norm.values) EXPECT_NEAR(v, 0.0, 0.05);  // ~4 sigma at 1000 samples
  std::fill(tr.py.begin(), tr.py.end(), 0.0f);
  for (double v : stokes_rms(tr, 1.0).s1_norm.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(StokesRms, BoundedAndValidated) {
  SopTrace tr{TimeGrid::at_rate(kT0, 1000, 5), {}, {}, 0.01};
  Rng rng(5);
  for (std::size_t i = 0; i < tr.time.count; ++i) {
    tr.px.push_back(static_cast<float>(rng.normal() * rng.uniform() * 10));
    tr.py.push_back(static_cast<float>(rng.normal() * (i % 7)));
  }
  const auto s = stokes_rms(tr, 0.05);
  for (std::size_t k = 0; k < s.valid.size(); ++k) {
    if (s.valid[k]) {
      ASSERT_GE(s.s1_norm.values[k], -1.0);
      ASSERT_LE(s.s1_norm.values[k], 1.0);
    }
  }
  EXPECT_THROW(stokes_rms(tr, 0.005), InvalidArgument);
  EXPECT_THROW(stokes_rms(SopTrace{TimeGrid::make(kT0, 1e-3, 1), {}, {}, 0}, 1.0), InvalidArgument);
}

TEST(StokesRms, FlagsWindowsBelowNoiseFloor) {
  SopTrace tr{TimeGrid::at_rate(kT0, 1000, 3), std::vector<float>(3001, 0.0f), std::vector<float>(3001, 0.0f), 0.1};
  for (std::size_t i = 2000; i < 3001; ++i) tr.px[i] = 1.0f;
  const auto s = stokes_rms(tr, 1.0);
  EXPECT_EQ(s.valid, (std::vector<std::uint8_t>{0, 0, 1}));
}

TEST(Spectrogram, NoiseOnlyStaysNearFloor) {
  SopConfig cfg = quiet_cfg();
  cfg.detector_noise_std = 0.15;
  cfg.seed = 12;
  StateSeries st{TimeGrid::at_rate(kT0, 50, 300), std::vector<Stokes>(15001, cfg.input_state)};
  const auto spec = sop_spectrogram(detect(st, cfg), {1024, 0.5, WindowKind::hann});
  const auto avg = time_averaged_db(spec, 0, spec.rows());
  std::vector<double> band;
  for (std::size_t c = 0; c < avg.size(); ++c)
    if (spec.position.at(c) >= 0.5 && spec.position.at(c) <= 10.0) band.push_back(avg[c]);
  const double floor = median(band);
  for (double v : band) EXPECT_LT(v, floor + 6.0);
}

TEST(Spectrogram, InjectedToneFoundAndRotationInvariant) {
  auto f = field(100, 100, 200, 240);
  for (std::size_t r = 0; r < f.time.count; ++r)
    for (std::size_t c = 20; c < 30; ++c)
      f.dynamic_nstrain[r * 100 + c] = static_cast<float>(2.0 * std::sin(kTwoPi * 2.2 * f.time.offset_s(r)));
  const auto plates = random_plates(10, 9);
  SopConfig cfg = quiet_cfg();
  cfg.detector_noise_std = 0.05;
  cfg.seed = 2;
  const auto spec = sop_spectrogram(detect(propagate_polarization(f, plates, cfg), cfg), {2048, 0.5, WindowKind::hann});
  EXPECT_LE(spec.position.end_m(), 100.0);
  EXPECT_NEAR(peak_hz(spec, 0.5, 10.0), 2.2, 0.1);

  // a fixed rotation of the launch state moves s1 but not the tone
  const auto rot = rotate(cfg.input_state, {0.0, 0.6, 0.8}, 1.1);
  cfg.input_state = rot;
  const auto spec2 = sop_spectrogram(detect(propagate_polarization(f, plates, cfg), cfg), {2048, 0.5, WindowKind::hann});
  EXPECT_NEAR(peak_hz(spec2, 0.5, 10.0), 2.2, 0.1);
}

TEST(Spectrogram, DecimationKeepsPeak) {
  auto f = field(100, 100, 200, 60);
  for (std::size_t r = 0; r < f.time.count; ++r)
    for (std::size_t c = 40; c < 60; ++c)
      f.dynamic_nstrain[r * 100 + c] = static_cast<float>(3.0 * std::sin(kTwoPi * 2.35 * f.time.offset_s(r)));
  SopConfig cfg = quiet_cfg(44100.0);
  const auto tr = detect(propagate_polarization(f, random_plates(10, 10), cfg), cfg);
  const auto dec = sop_spectrogram(tr, {1024, 0.5, WindowKind::hann});
  Series raw{tr.time, std::vector<double>(tr.px.size()), Unit::dimensionless};
  for (std::size_t i = 0; i < tr.px.size(); ++i) raw.values[i] = double(tr.px[i]) - tr.py[i];
  const auto full = stft_spectrogram(raw, {1u << 18, 0.5, WindowKind::hann});
  const double bin = std::max(dec.position.spacing_m, full.position.spacing_m);
  EXPECT_NEAR(peak_hz(dec, 1.0, 5.0), peak_hz(full, 1.0, 5.0), bin);
  EXPECT_NEAR(peak_hz(dec, 1.0, 5.0), 2.35, 0.1);
}

TEST(Fluctuation, StdOfWindowsInRange) {
  StokesSeries s{Series{TimeGrid::make(kT0, 1, 10), {0, 1, 0, 1, 0, 1, 5, 5, 5, 5}, Unit::dimensionless},
                 std::vector<std::uint8_t>(10, 1)};
  EXPECT_DOUBLE_EQ(fluctuation_magnitude(s, kT0, add_seconds(kT0, 6)), 0.5);
  EXPECT_THROW(fluctuation_magnitude(s, kT0, add_seconds(kT0, 1)), InvalidArgument);
}

TEST(TraceFile, RoundTrip) {
  SopConfig cfg = quiet_cfg(1000.0);
  cfg.detector_noise_std = 0.1;
  const auto tr = detect(s1_sine(3.0, 0.4, 100, 5), cfg);
  const auto path = std::filesystem::temp_directory_path() / "fibersense-sop-trace.wf";
  write_sop_trace(path, tr);
  const auto back = read_sop_trace(path);
  EXPECT_EQ(back.px, tr.px);
  EXPECT_EQ(back.py, tr.py);
  EXPECT_EQ(back.time, tr.time);
  EXPECT_DOUBLE_EQ(back.detector_noise_std, tr.detector_noise_std);
  std::filesystem::remove(path);
}
