#pragma once

#include <stdexcept>
#include <string>

namespace ergtrack {

// Malformed or inconsistent configuration (bad matrix, empty grid, unknown key...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A state that is not a point of the system it is used with.
class InvalidState : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A request that would exceed a configured size cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace ergtrack
