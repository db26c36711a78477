#pragma once

#include <string>
#include <string_view>

namespace fibersense::core {

enum class Unit {
  radian,
  strain,
  nanostrain,
  microstrain,
  meters_per_second,
  decibel,
  dimensionless,
  power,
};

std::string_view to_string(Unit u);
Unit unit_from_string(std::string_view tag);

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace fibersense::core
