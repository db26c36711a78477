#include "fibersense/core/time.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::core {
namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + len;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw FormatError(fmt::format("invalid timestamp '{}'", text));
  }
  return value;
}

}  // namespace

UtcTime parse_utc(std::string_view text) {
  using namespace std::chrono;
  // YYYY-MM-DDTHH:MM:SS is 19 characters.
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
    throw FormatError(fmt::format("invalid timestamp '{}'", text));
  }
  const year_month_day ymd{year{parse_field(text, 0, 4)},
                           month{static_cast<unsigned>(parse_field(text, 5, 2))},
                           day{static_cast<unsigned>(parse_field(text, 8, 2))}};
  if (!ymd.ok()) throw FormatError(fmt::format("invalid date in timestamp '{}'", text));
  const int hh = parse_field(text, 11, 2);
  const int mm = parse_field(text, 14, 2);
  const int ss = parse_field(text, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) {
    throw FormatError(fmt::format("invalid time of day in timestamp '{}'", text));
  }
  std::size_t pos = 19;
  std::int64_t micros = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 6) {
        micros = micros * 10 + (text[pos] - '0');
        ++digits;
      }
      ++pos;
    }
    if (digits == 0) throw FormatError(fmt::format("invalid fraction in timestamp '{}'", text));
    for (; digits < 6; ++digits) micros *= 10;
  }
  const std::string_view rest = text.substr(pos);
  if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) {
    throw FormatError(fmt::format("timestamp '{}' must be UTC", text));
  }
  return UtcTime{sys_days{ymd}.time_since_epoch() + hours{hh} + minutes{mm} + seconds{ss} +
                 Microseconds{micros}};
}

std::string format_utc(UtcTime t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  auto rem = t - day_point;
  const auto h = duration_cast<hours>(rem);
  rem -= h;
  const auto m = duration_cast<minutes>(rem);
  rem -= m;
  const auto s = duration_cast<seconds>(rem);
  rem -= s;
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:06d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     h.count(), m.count(), s.count(), rem.count());
}

double seconds_between(UtcTime from, UtcTime to) {
  return static_cast<double>((to - from).count()) * 1e-6;
}

UtcTime add_seconds(UtcTime t, double seconds) {
  return t + Microseconds{static_cast<std::int64_t>(std::llround(seconds * 1e6))};
}

}  // namespace fibersense::core
