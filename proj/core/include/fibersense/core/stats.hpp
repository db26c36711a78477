#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fibersense/core/types.hpp"

namespace fibersense::core {

double mean(std::span<const double> v);
/// Population standard deviation (divides by n).
double population_std(std::span<const double> v);
/// Pearson correlation; returns 0 when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);
/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);
double median(std::vector<double> v);

/// Streaming block-decimated population standard deviation.
///
/// Rows are pushed in time order; every block_t rows the buffered block is
/// reduced to one output row of cols / block_x cells. Trailing rows or columns
/// that do not fill a complete block are dropped.
class BlockStdAccumulator {
 public:
  BlockStdAccumulator(std::size_t cols, std::size_t block_t, std::size_t block_x);

  /// `rows` holds a whole number of rows of `cols` values.
  void push(std::span<const float> rows);

  std::size_t out_cols() const { return cols_ / block_x_; }
  std::size_t out_rows() const { return out_.size() / out_cols(); }
  const std::vector<float>& values() const { return out_; }
  std::vector<float> take() { return std::move(out_); }

 private:
  void reduce_block();

  std::size_t cols_;
  std::size_t block_t_;
  std::size_t block_x_;
  std::vector<float> buffer_;
  std::size_t filled_ = 0;
  std::vector<float> out_;
};

/// Decimated axes produced by windowed_std: block centres at block spacing.
TimeGrid decimate(const TimeGrid& g, std::size_t block);
PositionGrid decimate(const PositionGrid& g, std::size_t block);

/// Population std over non-overlapping block_t x block_x blocks.
Waterfall windowed_std(const Waterfall& w, std::size_t block_t, std::size_t block_x);

}  // namespace fibersense::core
