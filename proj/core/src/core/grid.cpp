#include "fibersense/core/grid.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "fibersense/core/types.hpp"

namespace fibersense::core {

PositionGrid PositionGrid::make(double start_m, double spacing_m, std::size_t count) {
  PositionGrid g{start_m, spacing_m, count};
  g.validate();
  return g;
}

PositionGrid PositionGrid::covering(double start_m, double end_m, double spacing_m) {
  if (!(spacing_m > 0.0) || !(end_m >= start_m)) {
    throw InvalidArgument(fmt::format("cannot cover [{}, {}] m at spacing {} m", start_m, end_m, spacing_m));
  }
  const auto count = static_cast<std::size_t>(std::floor((end_m - start_m) / spacing_m + 1e-9)) + 1;
  return make(start_m, spacing_m, count);
}

void PositionGrid::validate() const {
  if (!(spacing_m > 0.0) || !std::isfinite(spacing_m) || !std::isfinite(start_m)) {
    throw InvalidArgument(fmt::format("position spacing must be positive and finite (got {})", spacing_m));
  }
  if (count < 1) throw InvalidArgument("position grid needs at least one sample");
}

bool PositionGrid::contains(double x_m) const {
  const double tol = 0.5 * spacing_m;
  return x_m >= start_m - tol && x_m <= end_m() + tol;
}

std::size_t PositionGrid::nearest_index(double x_m) const {
  if (!contains(x_m)) {
    throw InvalidArgument(fmt::format("position {} m outside grid [{}, {}] m", x_m, start_m, end_m()));
  }
  const double idx = std::round((x_m - start_m) / spacing_m);
  if (idx <= 0.0) return 0;
  return std::min(count - 1, static_cast<std::size_t>(idx));
}

TimeGrid TimeGrid::make(UtcTime t0, double dt_s, std::size_t count) {
  TimeGrid g{t0, dt_s, count};
  g.validate();
  return g;
}

TimeGrid TimeGrid::at_rate(UtcTime t0, double rate_hz, double duration_s) {
  if (!(rate_hz > 0.0) || !(duration_s >= 0.0)) {
    throw InvalidArgument(fmt::format("invalid rate {} Hz / duration {} s", rate_hz, duration_s));
  }
  const auto count = static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9));
  return make(t0, 1.0 / rate_hz, std::max<std::size_t>(count, 1));
}

void TimeGrid::validate() const {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) {
    throw InvalidArgument(fmt::format("time step must be positive and finite (got {})", dt_s));
  }
  if (count < 1) throw InvalidArgument("time grid needs at least one sample");
}

UtcTime TimeGrid::at(std::size_t i) const { return add_seconds(t0, offset_s(i)); }

std::size_t TimeGrid::nearest_index(UtcTime t) const {
  const double idx = std::round(seconds_between(t0, t) / dt_s);
  if (idx <= 0.0) return 0;
  return std::min(count - 1, static_cast<std::size_t>(idx));
}

Waterfall Waterfall::zeros(TimeGrid time, PositionGrid position, Unit unit, AxisKind axis) {
  time.validate();
  position.validate();
  Waterfall w{time, position, axis, unit, {}};
  w.values.assign(time.count * position.count, 0.0f);
  return w;
}

std::vector<double> Waterfall::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = (*this)(r, c);
  return out;
}

void Waterfall::validate() const {
  time.validate();
  position.validate();
  if (values.size() != time.count * position.count) {
    throw InvalidArgument(fmt::format("waterfall holds {} values, shape is {} x {}", values.size(),
                                      time.count, position.count));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("waterfall contains non-finite values");
  }
}

void Series::validate() const {
  time.validate();
  if (values.size() != time.count) {
    throw InvalidArgument(fmt::format("series holds {} values for {} timestamps", values.size(), time.count));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("series contains non-finite values");
  }
}

Profile Profile::filled(PositionGrid position, double value, Unit unit) {
  position.validate();
  return Profile{position, std::vector<double>(position.count, value),
                 std::vector<std::uint8_t>(position.count, 1), unit};
}

void Profile::validate() const {
  position.validate();
  if (values.size() != position.count || valid.size() != position.count) {
    throw InvalidArgument("profile length does not match its position grid");
  }
}

}  // namespace fibersense::core
