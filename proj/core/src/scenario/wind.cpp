#include "fibersense/scenario/wind.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::scenario {

using core::UtcTime;

double WindSeries::interpolate(UtcTime t) const {
  if (!covers(t)) throw InvalidArgument(fmt::format("{}: time outside station span", station_id));
  const auto it = std::lower_bound(time.begin(), time.end(), t);
  const auto i = static_cast<std::size_t>(it - time.begin());
  if (time[i] == t) return speed_mps[i];
  const double span = core::seconds_between(time[i - 1], time[i]);
  const double f = core::seconds_between(time[i - 1], t) / span;
  return speed_mps[i - 1] + f * (speed_mps[i] - speed_mps[i - 1]);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<WindSeries> ingest_wind(std::istream& csv, const std::string& source) {
  std::vector<WindSeries> stations;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(csv, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    if (row.rfind("timestamp", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(trim(cell));
    const std::string where = fmt::format("{}:{}", source, line_no);
    if (f.size() != 3) throw FormatError(fmt::format("{}: expected timestamp,station_id,speed_mps", where));
    WindRecord rec;
    try {
      rec.time = core::parse_utc(f[0]);
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("{}: {}", where, e.what()));
    }
    rec.station_id = f[1];
    if (rec.station_id.empty()) throw FormatError(fmt::format("{}: empty station id", where));
    try {
      std::size_t used = 0;
      rec.speed_mps = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument(f[2]);
    } catch (const std::exception&) {
      throw FormatError(fmt::format("{}: speed '{}' is not a number", where, f[2]));
    }
    if (!std::isfinite(rec.speed_mps) || rec.speed_mps < 0.0) {
      throw FormatError(fmt::format("{}: speed {} m/s must be finite and non-negative", where, f[2]));
    }
    auto [it, inserted] = index.try_emplace(rec.station_id, stations.size());
    if (inserted) stations.push_back(WindSeries{rec.station_id, {}, {}});
    WindSeries& st = stations[it->second];
    if (!st.time.empty() && rec.time <= st.time.back()) {
      throw FormatError(fmt::format("{}: timestamp {} for station '{}' is {} (timestamps must increase)", where,
                                    f[0], rec.station_id, rec.time == st.time.back() ? "duplicated" : "out of order"));
    }
    st.time.push_back(rec.time);
    st.speed_mps.push_back(rec.speed_mps);
  }
  if (stations.empty()) throw FormatError(fmt::format("{}: station file has no data rows", source));
  return stations;
}

std::vector<WindSeries> ingest_wind(const std::vector<std::filesystem::path>& files) {
  std::vector<WindSeries> all;
  for (const auto& path : files) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("wind file '{}' cannot be opened", path.string()));
    for (auto& st : ingest_wind(is, path.string())) {
      const bool dup = std::any_of(all.begin(), all.end(),
                                   [&](const WindSeries& s) { return s.station_id == st.station_id; });
      if (dup) {
        throw FormatError(fmt::format("{}: station '{}' already ingested from another file", path.string(),
                                      st.station_id));
      }
      all.push_back(std::move(st));
    }
  }
  if (all.empty()) throw ConfigError("no wind stations given");
  return all;
}

WindField::WindField(std::vector<WindSeries> stations) : stations_(std::move(stations)) {
  if (stations_.empty()) throw InvalidArgument("wind field needs at least one station");
  begin_ = stations_.front().begin();
  end_ = stations_.front().end();
  for (const auto& s : stations_) {
    if (s.time.empty()) throw InvalidArgument(fmt::format("station '{}' has no samples", s.station_id));
    begin_ = std::min(begin_, s.begin());
    end_ = std::max(end_, s.end());
  }
}

std::optional<double> WindField::speed_at(UtcTime t) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : stations_) {
    if (s.covers(t)) {
      sum += s.interpolate(t);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double WindField::peak() const { return *speed_at(peak_time()); }

UtcTime WindField::peak_time() const {
  // The fused speed is piecewise linear with knots at station timestamps.
  UtcTime best_t = begin_;
  double best = -1.0;
  for (const auto& s : stations_) {
    for (const auto t : s.time) {
      const double v = *speed_at(t);
      if (v > best || (v == best && t < best_t)) {
        best = v;
        best_t = t;
      }
    }
  }
  return best_t;
}

core::Series fuse_wind(const std::vector<WindSeries>& stations, const core::TimeGrid& grid) {
  grid.validate();
  const WindField field(stations);
  core::Series out{grid, std::vector<double>(grid.count), core::Unit::meters_per_second};
  for (std::size_t i = 0; i < grid.count; ++i) {
    const auto v = field.speed_at(grid.at(i));
    if (!v) {
      throw InvalidArgument(fmt::format("grid time {} is outside every station's span (no extrapolation)",
                                        core::format_utc(grid.at(i))));
    }
    out.values[i] = *v;
  }
  return out;
}

}  // namespace fibersense::scenario
