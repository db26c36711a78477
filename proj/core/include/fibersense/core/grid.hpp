#pragma once

#include <cstddef>

#include "fibersense/core/time.hpp"

namespace fibersense::core {

/// Uniform sample positions along the fiber: start_m + i * spacing_m.
struct PositionGrid {
  double start_m = 0.0;
  double spacing_m = 1.0;
  std::size_t count = 1;

  /// Validating constructor; spacing must be positive and count at least one.
  static PositionGrid make(double start_m, double spacing_m, std::size_t count);
  /// Grid covering [start_m, end_m] inclusive at the given spacing.
  static PositionGrid covering(double start_m, double end_m, double spacing_m);

  void validate() const;
  double at(std::size_t i) const { return start_m + static_cast<double>(i) * spacing_m; }
  double end_m() const { return at(count - 1); }
  double length_m() const { return spacing_m * static_cast<double>(count - 1); }
  bool contains(double x_m) const;
  /// Nearest sample index; throws InvalidArgument when x lies outside the grid by
  /// more than half a spacing.
  std::size_t nearest_index(double x_m) const;

  bool operator==(const PositionGrid&) const = default;
};

/// Uniform sample times: t0 + i * dt_s.
struct TimeGrid {
  UtcTime t0{};
  double dt_s = 1.0;
  std::size_t count = 1;

  static TimeGrid make(UtcTime t0, double dt_s, std::size_t count);
  static TimeGrid at_rate(UtcTime t0, double rate_hz, double duration_s);

  void validate() const;
  double rate_hz() const { return 1.0 / dt_s; }
  /// Seconds since t0 of sample i.
  double offset_s(std::size_t i) const { return static_cast<double>(i) * dt_s; }
  UtcTime at(std::size_t i) const;
  double duration_s() const { return dt_s * static_cast<double>(count - 1); }
  UtcTime end() const { return at(count - 1); }
  /// Nearest sample index to t, clamped to the grid.
  std::size_t nearest_index(UtcTime t) const;

  bool operator==(const TimeGrid&) const = default;
};

}  // namespace fibersense::core
