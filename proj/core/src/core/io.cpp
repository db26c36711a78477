#include "fibersense/core/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::core {

using nlohmann::json;

namespace {

void encode_le(std::span<const float> src, std::vector<char>& dst) {
  dst.resize(src.size() * sizeof(float));
  std::memcpy(dst.data(), src.data(), dst.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < dst.size(); i += 4) {
      std::swap(dst[i], dst[i + 3]);
      std::swap(dst[i + 1], dst[i + 2]);
    }
  }
}

void decode_le(const std::vector<char>& src, std::size_t n_floats, float* dst) {
  std::memcpy(dst, src.data(), n_floats * sizeof(float));
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<unsigned char*>(dst);
    for (std::size_t i = 0; i < n_floats * 4; i += 4) {
      std::swap(bytes[i], bytes[i + 3]);
      std::swap(bytes[i + 1], bytes[i + 2]);
    }
  }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw FormatError(fmt::format("{}: missing field '{}'", where, key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: field '{}': {}", where, key, e.what()));
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw FormatError(fmt::format("{}: '{}' is not a finite number", where, text));
  }
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

Axis Axis::from_time(const TimeGrid& g) {
  return Axis{"time", 0.0, g.dt_s, g.count, g.t0};
}

Axis Axis::from_positions(const PositionGrid& g, std::string name) {
  return Axis{std::move(name), g.start_m, g.spacing_m, g.count, std::nullopt};
}

TimeGrid Axis::as_time() const {
  if (!t0) throw FormatError(fmt::format("axis '{}' is not a time axis", name));
  return TimeGrid::make(*t0, step, count);
}

PositionGrid Axis::as_positions() const { return PositionGrid::make(start, step, count); }

json ArrayHeader::to_json() const {
  auto axis_json = [](const Axis& a) {
    json j{{"name", a.name}, {"start", a.start}, {"step", a.step}, {"count", a.count}};
    if (a.t0) j["t0"] = format_utc(*a.t0);
    return j;
  };
  return json{{"schema", kArraySchema}, {"kind", kind},           {"unit", std::string(core::to_string(unit))},
              {"dtype", "float32le"},   {"rows", axis_json(rows)}, {"cols", axis_json(cols)},
              {"meta", meta}};
}

ArrayHeader ArrayHeader::from_json(const json& j) {
  const std::string where = "array header";
  const auto schema = require<std::string>(j, "schema", where);
  if (schema != kArraySchema) {
    throw FormatError(fmt::format("schema version mismatch: expected '{}', found '{}'", kArraySchema, schema));
  }
  if (require<std::string>(j, "dtype", where) != "float32le") {
    throw FormatError("unsupported dtype; expected float32le");
  }
  auto axis = [&](const char* key) {
    const json& a = j.at(key);
    const std::string w = fmt::format("{} axis '{}'", where, key);
    Axis out{require<std::string>(a, "name", w), require<double>(a, "start", w), require<double>(a, "step", w),
             require<std::size_t>(a, "count", w), std::nullopt};
    if (a.contains("t0")) out.t0 = parse_utc(a.at("t0").get<std::string>());
    return out;
  };
  if (!j.contains("rows") || !j.contains("cols")) throw FormatError("array header lacks axes");
  ArrayHeader h;
  h.kind = require<std::string>(j, "kind", where);
  h.unit = unit_from_string(require<std::string>(j, "unit", where));
  h.rows = axis("rows");
  h.cols = axis("cols");
  if (j.contains("meta")) h.meta = j.at("meta");
  return h;
}

ArrayWriter::ArrayWriter(const std::filesystem::path& path, ArrayHeader header)
    : path_(path), header_(std::move(header)) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw ConfigError(fmt::format("cannot open '{}' for writing", path.string()));
  const std::string line = header_.to_json().dump();
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.put('\n');
}

void ArrayWriter::write_rows(std::span<const float> rows) {
  if (rows.size() % header_.cols.count != 0) throw InvalidArgument("partial row written to array file");
  const std::size_t n = rows.size() / header_.cols.count;
  if (rows_written_ + n > header_.rows.count) {
    throw InvalidArgument(fmt::format("'{}': more rows written than declared ({})", path_.string(),
                                      header_.rows.count));
  }
  encode_le(rows, scratch_);
  out_.write(scratch_.data(), static_cast<std::streamsize>(scratch_.size()));
  rows_written_ += n;
}

void ArrayWriter::finish() {
  if (rows_written_ != header_.rows.count) {
    throw InvalidArgument(fmt::format("'{}': {} rows written, header declares {}", path_.string(),
                                      rows_written_, header_.rows.count));
  }
  out_.flush();
  if (!out_) throw std::runtime_error(fmt::format("write to '{}' failed", path_.string()));
  out_.close();
}

ArrayReader::ArrayReader(const std::filesystem::path& path) : path_(path) {
  in_.open(path, std::ios::binary);
  if (!in_) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in_, line)) throw FormatError(fmt::format("'{}': missing header line", path.string()));
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("'{}': header is not valid JSON: {}", path.string(), e.what()));
  }
  try {
    header_ = ArrayHeader::from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("'{}': {}", path.string(), e.what()));
  }
  payload_offset_ = line.size() + 1;
  const auto size = static_cast<std::size_t>(std::filesystem::file_size(path));
  const std::size_t expected = payload_offset_ + header_.payload_bytes();
  if (size < expected) {
    throw FormatError(fmt::format("'{}': float payload truncated at byte offset {} (expected {} bytes)",
                                  path.string(), size, expected));
  }
  if (size > expected) {
    throw FormatError(fmt::format("'{}': {} unexpected trailing bytes after byte offset {}", path.string(),
                                  size - expected, expected));
  }
}

std::size_t ArrayReader::read_rows(std::size_t max_rows, std::vector<float>& out) {
  const std::size_t n = std::min(max_rows, rows_remaining());
  const std::size_t floats = n * header_.cols.count;
  scratch_.resize(floats * sizeof(float));
  in_.read(scratch_.data(), static_cast<std::streamsize>(scratch_.size()));
  if (static_cast<std::size_t>(in_.gcount()) != scratch_.size()) {
    const std::size_t at = payload_offset_ + rows_read_ * header_.cols.count * sizeof(float) +
                           static_cast<std::size_t>(in_.gcount());
    throw FormatError(fmt::format("'{}': float payload truncated at byte offset {}", path_.string(), at));
  }
  out.resize(floats);
  decode_le(scratch_, floats, out.data());
  rows_read_ += n;
  return n;
}

void write_array(const std::filesystem::path& path, const ArrayHeader& header, std::span<const float> values) {
  ArrayWriter w(path, header);
  w.write_rows(values);
  w.finish();
}

std::vector<float> read_array(const std::filesystem::path& path, ArrayHeader* header_out) {
  ArrayReader r(path);
  std::vector<float> values;
  r.read_rows(r.header().rows.count, values);
  if (header_out) *header_out = r.header();
  return values;
}

ArrayHeader waterfall_header(const Waterfall& w) {
  ArrayHeader h;
  h.kind = "waterfall";
  h.unit = w.unit;
  h.rows = Axis::from_time(w.time);
  h.cols = Axis::from_positions(w.position, w.axis == AxisKind::frequency ? "frequency" : "position");
  return h;
}

void write_waterfall(const std::filesystem::path& path, const Waterfall& w, const json& meta) {
  w.validate();
  ArrayHeader h = waterfall_header(w);
  h.meta = meta;
  write_array(path, h, w.values);
}

Waterfall read_waterfall(const std::filesystem::path& path, json* meta_out) {
  ArrayHeader h;
  auto values = read_array(path, &h);
  if (h.kind != "waterfall") {
    throw FormatError(fmt::format("'{}': expected a waterfall, found '{}'", path.string(), h.kind));
  }
  Waterfall w;
  w.time = h.rows.as_time();
  w.position = h.cols.as_positions();
  w.axis = h.cols.name == "frequency" ? AxisKind::frequency : AxisKind::position;
  w.unit = h.unit;
  w.values = std::move(values);
  if (meta_out) *meta_out = h.meta;
  return w;
}

void write_series_csv(std::ostream& os, const Series& s) {
  os << "timestamp,value\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    os << format_utc(s.time.at(i)) << ',' << format_number(s.values[i]) << '\n';
  }
}

void write_series_csv(const std::filesystem::path& path, const Series& s) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError(fmt::format("cannot open '{}' for writing", path.string()));
  write_series_csv(os, s);
}

Series read_series_csv(std::istream& is, Unit unit, const std::string& source) {
  std::string line;
  std::vector<UtcTime> times;
  std::vector<double> values;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("timestamp", 0) == 0) continue;
    const auto fields = split_csv(line);
    const std::string where = fmt::format("{}:{}", source, line_no);
    if (fields.size() != 2) throw FormatError(fmt::format("{}: expected 2 columns", where));
    try {
      times.push_back(parse_utc(trim(fields[0])));
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("{}: {}", where, e.what()));
    }
    values.push_back(parse_double(trim(fields[1]), where));
  }
  if (times.empty()) throw FormatError(fmt::format("{}: no data rows", source));
  double dt = 1.0;
  if (times.size() > 1) {
    dt = seconds_between(times[0], times[1]);
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double expect = dt * static_cast<double>(i);
      if (!(dt > 0.0) || std::abs(seconds_between(times[0], times[i]) - expect) > 2e-6) {
        throw FormatError(fmt::format("{}: row {} breaks uniform sampling", source, i + 1));
      }
    }
  }
  Series s{TimeGrid::make(times[0], dt, times.size()), std::move(values), unit};
  return s;
}

Series read_series_csv(const std::filesystem::path& path, Unit unit) {
  std::ifstream is(path);
  if (!is) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  return read_series_csv(is, unit, path.string());
}

void write_profile_csv(const std::filesystem::path& path, const Profile& p, const std::string& value_name) {
  p.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError(fmt::format("cannot open '{}' for writing", path.string()));
  os << "position_m," << value_name << '\n';
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    os << format_number(p.position.at(i)) << ',';
    if (p.is_valid(i)) os << format_number(p.values[i]);
    os << '\n';
  }
}

Profile read_profile_csv(const std::filesystem::path& path, Unit unit) {
  std::ifstream is(path);
  if (!is) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::vector<double> pos, vals;
  std::vector<std::uint8_t> valid;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || (line_no == 1 && line.rfind("position_m", 0) == 0)) continue;
    const auto fields = split_csv(line);
    const std::string where = fmt::format("{}:{}", path.string(), line_no);
    if (fields.size() != 2) throw FormatError(fmt::format("{}: expected 2 columns", where));
    pos.push_back(parse_double(trim(fields[0]), where));
    const auto v = trim(fields[1]);
    valid.push_back(v.empty() ? 0 : 1);
    vals.push_back(v.empty() ? 0.0 : parse_double(v, where));
  }
  if (pos.empty()) throw FormatError(fmt::format("{}: no data rows", path.string()));
  const double spacing = pos.size() > 1 ? pos[1] - pos[0] : 1.0;
  Profile p{PositionGrid::make(pos[0], spacing, pos.size()), std::move(vals), std::move(valid), unit};
  return p;
}

}  // namespace fibersense::core
