#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fibersense/core/grid.hpp"
#include "fibersense/core/units.hpp"

namespace fibersense::core {

/// What the second axis of a Waterfall measures.
enum class AxisKind { position, frequency };

/// Time x (position | frequency) float matrix, row-major, one row per time sample.
struct Waterfall {
  TimeGrid time;
  PositionGrid position;  // frequency in Hz when axis == frequency
  AxisKind axis = AxisKind::position;
  Unit unit = Unit::dimensionless;
  std::vector<float> values;

  static Waterfall zeros(TimeGrid time, PositionGrid position, Unit unit,
                         AxisKind axis = AxisKind::position);

  std::size_t rows() const { return time.count; }
  std::size_t cols() const { return position.count; }
  float& operator()(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  float operator()(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  std::span<float> row(std::size_t r) { return {values.data() + r * cols(), cols()}; }
  std::vector<double> column(std::size_t c) const;

  /// Shape and finiteness check; throws InvalidArgument.
  void validate() const;
};

/// Uniformly sampled time series.
struct Series {
  TimeGrid time;
  std::vector<double> values;
  Unit unit = Unit::dimensionless;

  void validate() const;
};

/// Values over position, with per-sample validity (invalid samples are gaps).
struct Profile {
  PositionGrid position;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  Unit unit = Unit::dimensionless;

  static Profile filled(PositionGrid position, double value, Unit unit);
  bool is_valid(std::size_t i) const { return valid[i] != 0; }
  void validate() const;
};

}  // namespace fibersense::core
