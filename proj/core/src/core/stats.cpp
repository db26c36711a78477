#include "fibersense/core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::core {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: inputs differ in length");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  return pearson(ra, rb);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

BlockStdAccumulator::BlockStdAccumulator(std::size_t cols, std::size_t block_t, std::size_t block_x)
    : cols_(cols), block_t_(block_t), block_x_(block_x) {
  if (block_t < 1 || block_x < 1 || block_x > cols) {
    throw InvalidArgument(fmt::format("block sizes {} x {} invalid for {} columns", block_t, block_x, cols));
  }
  buffer_.resize(block_t_ * cols_);
}

void BlockStdAccumulator::push(std::span<const float> rows) {
  if (rows.size() % cols_ != 0) throw InvalidArgument("partial row pushed to BlockStdAccumulator");
  std::size_t offset = 0;
  while (offset < rows.size()) {
    const std::size_t take = std::min(rows.size() - offset, (block_t_ - filled_) * cols_);
    std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(offset), take,
                buffer_.begin() + static_cast<std::ptrdiff_t>(filled_ * cols_));
    filled_ += take / cols_;
    offset += take;
    if (filled_ == block_t_) {
      reduce_block();
      filled_ = 0;
    }
  }
}

void BlockStdAccumulator::reduce_block() {
  // Two passes over the buffered rows in memory order: column sums, then
  // squared deviations from each cell mean.
  const std::size_t ncell = out_cols();
  const std::size_t used = ncell * block_x_;
  const double n = static_cast<double>(block_t_ * block_x_);
  std::vector<double> col(used, 0.0);
  for (std::size_t r = 0; r < block_t_; ++r) {
    const float* p = buffer_.data() + r * cols_;
    for (std::size_t c = 0; c < used; ++c) col[c] += p[c];
  }
  std::vector<double> mean(ncell, 0.0);
  for (std::size_t c = 0; c < used; ++c) mean[c / block_x_] += col[c];
  for (double& m : mean) m /= n;
  std::fill(col.begin(), col.end(), 0.0);
  for (std::size_t r = 0; r < block_t_; ++r) {
    const float* p = buffer_.data() + r * cols_;
    for (std::size_t c = 0; c < used; ++c) {
      const double d = p[c] - mean[c / block_x_];
      col[c] += d * d;
    }
  }
  std::vector<double> ss(ncell, 0.0);
  for (std::size_t c = 0; c < used; ++c) ss[c / block_x_] += col[c];
  for (std::size_t cell = 0; cell < ncell; ++cell) out_.push_back(static_cast<float>(std::sqrt(ss[cell] / n)));
}

TimeGrid decimate(const TimeGrid& g, std::size_t block) {
  return TimeGrid{add_seconds(g.t0, 0.5 * static_cast<double>(block - 1) * g.dt_s),
                  g.dt_s * static_cast<double>(block), g.count / block};
}

PositionGrid decimate(const PositionGrid& g, std::size_t block) {
  return PositionGrid{g.start_m + 0.5 * static_cast<double>(block - 1) * g.spacing_m,
                      g.spacing_m * static_cast<double>(block), g.count / block};
}

Waterfall windowed_std(const Waterfall& w, std::size_t block_t, std::size_t block_x) {
  if (block_t < 1 || block_x < 1 || block_t > w.rows() || block_x > w.cols()) {
    throw InvalidArgument(fmt::format("block {} x {} does not fit a {} x {} waterfall", block_t, block_x,
                                      w.rows(), w.cols()));
  }
  BlockStdAccumulator acc(w.cols(), block_t, block_x);
  acc.push(w.values);
  Waterfall out{decimate(w.time, block_t), decimate(w.position, block_x), w.axis, w.unit, acc.take()};
  return out;
}

}  // namespace fibersense::core
