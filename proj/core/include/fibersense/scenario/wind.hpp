#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fibersense/core/types.hpp"

namespace fibersense::scenario {

/// One row of a wind CSV (`timestamp,station_id,speed_mps`).
struct WindRecord {
  std::string station_id;
  core::UtcTime time;
  double speed_mps = 0.0;
};

/// Wind speeds of one station on its native (possibly irregular) timestamps.
struct WindSeries {
  std::string station_id;
  std::vector<core::UtcTime> time;
  std::vector<double> speed_mps;

  core::UtcTime begin() const { return time.front(); }
  core::UtcTime end() const { return time.back(); }
  bool covers(core::UtcTime t) const { return !time.empty() && t >= begin() && t <= end(); }
  /// Linear interpolation; t must lie within [begin, end].
  double interpolate(core::UtcTime t) const;
};

/// Parses one CSV stream. Stations appear in first-seen order. Rows must have
/// non-negative finite speeds and strictly increasing timestamps per station;
/// violations throw FormatError naming `source` and the line number. A stream
/// without data rows is an error.
std::vector<WindSeries> ingest_wind(std::istream& csv, const std::string& source);
/// Ingests several streams (one per station file, or mixed) and merges the
/// stations they contain. A station may not be split across streams.
std::vector<WindSeries> ingest_wind(const std::vector<std::filesystem::path>& files);

/// Station-averaged wind: at any time, the mean of the linearly interpolated
/// speeds of every station whose span covers that time.
class WindField {
 public:
  explicit WindField(std::vector<WindSeries> stations);

  /// nullopt when no station covers t (no extrapolation).
  std::optional<double> speed_at(core::UtcTime t) const;
  /// Earliest/latest time covered by at least one station.
  core::UtcTime begin() const { return begin_; }
  core::UtcTime end() const { return end_; }
  /// Maximum of the fused speed; attained at a station timestamp.
  double peak() const;
  core::UtcTime peak_time() const;
  const std::vector<WindSeries>& stations() const { return stations_; }

 private:
  std::vector<WindSeries> stations_;
  core::UtcTime begin_{};
  core::UtcTime end_{};
};

/// Interpolates each station onto `grid` and averages pointwise. Throws
/// InvalidArgument if some grid point is outside every station's span.
core::Series fuse_wind(const std::vector<WindSeries>& stations, const core::TimeGrid& grid);

}  // namespace fibersense::scenario
