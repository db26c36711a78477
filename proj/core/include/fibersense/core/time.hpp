#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace fibersense::core {

using Microseconds = std::chrono::microseconds;
using UtcTime = std::chrono::sys_time<Microseconds>;

/// Parses `YYYY-MM-DDTHH:MM:SS[.ffffff][Z|+00:00]` (a space may replace the `T`).
/// Throws FormatError on anything else.
UtcTime parse_utc(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SS.ffffffZ`.
std::string format_utc(UtcTime t);

/// Seconds from `from` to `to`.
double seconds_between(UtcTime from, UtcTime to);

UtcTime add_seconds(UtcTime t, double seconds);

}  // namespace fibersense::core
