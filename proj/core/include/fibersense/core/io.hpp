#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibersense/core/types.hpp"

namespace fibersense::core {

/// Container schema tag written in every array file header.
inline constexpr const char* kArraySchema = "wf1";

/// One axis of an array file. Time axes carry an absolute origin.
struct Axis {
  std::string name;  // "time", "position", "frequency", "channel"
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 0;
  std::optional<UtcTime> t0;  // set for time axes

  static Axis from_time(const TimeGrid& g);
  static Axis from_positions(const PositionGrid& g, std::string name = "position");
  TimeGrid as_time() const;
  PositionGrid as_positions() const;
};

/// Header of the array container: one JSON line, then rows x cols float32
/// little-endian values in row-major order.
struct ArrayHeader {
  std::string kind;  // "waterfall", "spectrum_stack", "sop_trace"
  Unit unit = Unit::dimensionless;
  Axis rows;
  Axis cols;
  nlohmann::json meta = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ArrayHeader from_json(const nlohmann::json& j);
  std::size_t payload_bytes() const { return rows.count * cols.count * sizeof(float); }
};

/// Streams rows into an array file. finish() verifies the row count.
class ArrayWriter {
 public:
  ArrayWriter(const std::filesystem::path& path, ArrayHeader header);
  void write_rows(std::span<const float> rows);
  void finish();
  const ArrayHeader& header() const { return header_; }

 private:
  std::filesystem::path path_;
  ArrayHeader header_;
  std::ofstream out_;
  std::size_t rows_written_ = 0;
  std::vector<char> scratch_;
};

/// Streams rows out of an array file; validates the schema on open and reports
/// truncation with the byte offset at which the payload ended.
class ArrayReader {
 public:
  explicit ArrayReader(const std::filesystem::path& path);
  const ArrayHeader& header() const { return header_; }
  /// Reads up to max_rows rows into `out`; returns the number of rows read.
  std::size_t read_rows(std::size_t max_rows, std::vector<float>& out);
  std::size_t rows_remaining() const { return header_.rows.count - rows_read_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  ArrayHeader header_;
  std::size_t payload_offset_ = 0;
  std::size_t rows_read_ = 0;
  std::vector<char> scratch_;
};

void write_array(const std::filesystem::path& path, const ArrayHeader& header,
                 std::span<const float> values);
std::vector<float> read_array(const std::filesystem::path& path, ArrayHeader* header_out);

void write_waterfall(const std::filesystem::path& path, const Waterfall& w,
                     const nlohmann::json& meta = nlohmann::json::object());
Waterfall read_waterfall(const std::filesystem::path& path, nlohmann::json* meta_out = nullptr);
ArrayHeader waterfall_header(const Waterfall& w);

/// Series CSV: `timestamp,value` rows with ISO-8601 UTC timestamps.
void write_series_csv(std::ostream& os, const Series& s);
void write_series_csv(const std::filesystem::path& path, const Series& s);
/// Reads a uniformly sampled series back; the spacing is taken from the first
/// two rows and checked against the rest.
Series read_series_csv(std::istream& is, Unit unit, const std::string& source = "<stream>");
Series read_series_csv(const std::filesystem::path& path, Unit unit);

/// Profile CSV: `position_m,value` rows; invalid samples leave the value empty.
void write_profile_csv(const std::filesystem::path& path, const Profile& p,
                       const std::string& value_name = "value");
Profile read_profile_csv(const std::filesystem::path& path, Unit unit);

/// Shortest round-trippable decimal text for a double.
std::string format_number(double v);


}  // namespace fibersense::core
