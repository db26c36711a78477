#include "fibersense/core/units.hpp"

#include <array>
#include <utility>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::core {
namespace {

constexpr std::array<std::pair<Unit, std::string_view>, 8> kTags{{
    {Unit::radian, "radian"},
    {Unit::strain, "strain"},
    {Unit::nanostrain, "nanostrain"},
    {Unit::microstrain, "microstrain"},
    {Unit::meters_per_second, "m/s"},
    {Unit::decibel, "dB"},
    {Unit::dimensionless, "dimensionless"},
    {Unit::power, "power"},
}};

}  // namespace

std::string_view to_string(Unit u) {
  for (const auto& [unit, tag] : kTags) {
    if (unit == u) return tag;
  }
  return "dimensionless";
}

Unit unit_from_string(std::string_view tag) {
  for (const auto& [unit, name] : kTags) {
    if (name == tag) return unit;
  }
  throw FormatError(fmt::format("unknown unit tag '{}'", tag));
}

}  // namespace fibersense::core
