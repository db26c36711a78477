#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/parallel.hpp"
#include "fibersense/core/rng.hpp"
#include "fibersense/core/stats.hpp"

using namespace fibersense;
using namespace fibersense::core;

namespace {

const UtcTime kT0 = parse_utc("2025-08-04T00:00:00Z");

Waterfall noise_waterfall(std::size_t rows, std::size_t cols, std::uint64_t seed, double sigma = 1.0) {
  auto w = Waterfall::zeros(TimeGrid::make(kT0, 1.0 / 600, rows), PositionGrid::make(0, 10, cols), Unit::radian);
  Rng rng(seed);
  for (auto& v : w.values) v = static_cast<float>(sigma * rng.normal());
  return w;
}

// two-pass population std in long double, no shared code with the library
double ref_std(const Waterfall& w, std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc) {
  long double s = 0;
  for (std::size_t r = r0; r < r0 + nr; ++r)
    for (std::size_t c = c0; c < c0 + nc; ++c) s += w(r, c);
  const long double m = s / (nr * nc);
  long double q = 0;
  for (std::size_t r = r0; r < r0 + nr; ++r)
    for (std::size_t c = c0; c < c0 + nc; ++c) q += (w(r, c) - m) * (w(r, c) - m);
  return static_cast<double>(std::sqrt(q / (nr * nc)));
}

}  // namespace

TEST(Rng, SameSeedSameStream) {
  Rng a(0), b(0);
  for (int i = 0; i < 1'000'000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
  Rng c(0), d(0);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(c.normal(), d.normal());
}

TEST(Rng, DistinctSeedsDiffer) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng a(s), b(s + 1);
    int same = 0;
    for (int i = 0; i < 16; ++i) same += a.next_u64() == b.next_u64();
    ASSERT_EQ(same, 0) << "seed " << s;
  }
}

TEST(Rng, NormalMoments) {
  // CLT: 3 sigma of the sample mean at N = 1e6 is 0.003, of the sample std about 0.0021
  Rng rng(20250805);
  const int n = 1'000'000;
  double s = 0, q = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    q += x * x;
  }
  const double m = s / n;
  EXPECT_NEAR(m, 0.0, 0.005);
  EXPECT_NEAR(std::sqrt(q / n - m * m), 1.0, 0.005);
}

TEST(Rng, UniformRangeAndMean) {
  Rng rng(3);
  double s = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform_open_low();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    s += u;
  }
  EXPECT_NEAR(s / 100000, 0.5, 0.003);
}

TEST(Rng, DeriveSeedSeparatesTagsAndIndices) {
  EXPECT_EQ(derive_seed(1, "das", 3), derive_seed(1, "das", 3));
  EXPECT_NE(derive_seed(1, "das", 3), derive_seed(1, "das", 4));
  EXPECT_NE(derive_seed(1, "das", 3), derive_seed(1, "sop", 3));
  EXPECT_NE(derive_seed(1, "das", 3), derive_seed(2, "das", 3));
  EXPECT_NE(derive_seed(1, "ab", 0), derive_seed(1, "ba", 0));
}

TEST(Stats, Basics) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean(v), 2.5);
  EXPECT_DOUBLE_EQ(population_std(v), std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(median({5, 1, 3}), 3.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10}, c{5, 4, 3, 2, 1}, k{7, 7, 7, 7, 7};
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-12);
  EXPECT_NEAR(pearson(a, c), -1.0, 1e-12);
  EXPECT_EQ(pearson(a, k), 0.0);
  const std::vector<double> e{1, 4, 9, 16, 100};
  EXPECT_NEAR(spearman(a, e), 1.0, 1e-12);
  const std::vector<double> ties{1, 1, 2, 2, 3};
  EXPECT_GT(spearman(a, ties), 0.9);
}

TEST(WindowedStd, ConstantIsZero) {
  auto w = Waterfall::zeros(TimeGrid::make(kT0, 1, 40), PositionGrid::make(0, 10, 9), Unit::radian);
  std::fill(w.values.begin(), w.values.end(), 3.25f);
  const auto out = windowed_std(w, 10, 3);
  ASSERT_EQ(out.rows(), 4u);
  ASSERT_EQ(out.cols(), 3u);
  for (float v : out.values) EXPECT_EQ(v, 0.0f);
}

TEST(WindowedStd, AlternatingPair) {
  const float a = 0.75f;
  auto w = Waterfall::zeros(TimeGrid::make(kT0, 1, 8), PositionGrid::make(0, 10, 2), Unit::radian);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 2; ++c) w(r, c) = (r % 2 ? a : -a);
  const auto out = windowed_std(w, 2, 1);
  for (float v : out.values) EXPECT_FLOAT_EQ(v, a);
}

TEST(WindowedStd, WhiteNoiseBlock) {
  const auto w = noise_waterfall(10000, 4, 99);
  const auto out = windowed_std(w, 1000, 1);
  ASSERT_EQ(out.rows(), 10u);
  for (float v : out.values) EXPECT_NEAR(v, 1.0, 0.1);
}

TEST(WindowedStd, MatchesTwoPassReference) {
  const auto w = noise_waterfall(997, 23, 5, 3.0);
  const auto out = windowed_std(w, 50, 4);
  ASSERT_EQ(out.rows(), 19u);  // trailing partial block dropped
  ASSERT_EQ(out.cols(), 5u);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) EXPECT_NEAR(out(r, c), ref_std(w, r * 50, 50, c * 4, 4), 1e-4);
}

TEST(WindowedStd, AxesAreBlockCentres) {
  const auto w = noise_waterfall(100, 10, 1);
  const auto out = windowed_std(w, 10, 5);
  EXPECT_DOUBLE_EQ(out.position.start_m, 20.0);
  EXPECT_DOUBLE_EQ(out.position.spacing_m, 50.0);
  EXPECT_NEAR(seconds_between(kT0, out.time.t0), 4.5 / 600, 1e-6);
  EXPECT_NEAR(out.time.dt_s, 10.0 / 600, 1e-12);
}

TEST(WindowedStd, Preconditions) {
  const auto w = noise_waterfall(10, 5, 1);
  EXPECT_THROW(windowed_std(w, 0, 1), InvalidArgument);
  EXPECT_THROW(windowed_std(w, 1, 0), InvalidArgument);
  EXPECT_THROW(windowed_std(w, 11, 1), InvalidArgument);
  EXPECT_THROW(windowed_std(w, 1, 6), InvalidArgument);
}

TEST(WindowedStd, InvariantToConstantOffset) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = noise_waterfall(600, 12, 1000 + trial, 0.01 + rng.uniform());
    auto shifted = w;
    const double off = (rng.uniform() - 0.5) * 200.0;
    for (auto& v : shifted.values) v = static_cast<float>(v + off);
    const auto a = windowed_std(w, 60, 3);
    const auto b = windowed_std(shifted, 60, 3);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      // float storage of the shifted input costs ~ulp(|off|) per sample
      ASSERT_NEAR(a.values[i], b.values[i], 2e-5 * std::max(1.0, std::abs(off))) << "trial " << trial;
    }
  }
}

TEST(BlockStd, ChunkingDoesNotMatter) {
  const auto w = noise_waterfall(1203, 17, 8);
  const auto ref = windowed_std(w, 40, 2);
  for (std::size_t chunk : {1u, 7u, 40u, 333u, 1203u}) {
    BlockStdAccumulator acc(17, 40, 2);
    for (std::size_t r = 0; r < w.rows(); r += chunk) {
      const std::size_t n = std::min(chunk, w.rows() - r);
      acc.push(std::span<const float>(w.values.data() + r * 17, n * 17));
    }
    ASSERT_EQ(acc.out_rows(), ref.rows());
    ASSERT_EQ(acc.values(), ref.values) << "chunk " << chunk;
  }
}

TEST(Parallel, ResultIndependentOfJobs) {
  std::vector<double> one(10007), many(10007);
  auto body = [](std::vector<double>& out) {
    return [&out](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        Rng rng(derive_seed(5, "chan", i));
        out[i] = rng.normal();
      }
    };
  };
  parallel_for(one.size(), body(one), 1);
  parallel_for(many.size(), body(many), 7);
  EXPECT_EQ(one, many);
  EXPECT_THROW(parallel_for(10, [](std::size_t, std::size_t) { throw InvalidArgument("x"); }, 3), InvalidArgument);
}
