#pragma once

#include <stdexcept>
#include <string>

namespace fibersense {

/// Violated operation precondition (bad grid, block size, window length ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration or input validation failure; the message names the field or path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed on-disk data: bad CSV row, wrong schema version, truncated payload.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fibersense
