#pragma once

#include <stdexcept>
#include <string>

namespace camp {

// Bad or inconsistent configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing, malformed, or empty data (CLI exit code 3).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or numerical breakdown (CLI exit code 4).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Kinematic target outside the reachable workspace.
struct UnreachableTargetError : std::domain_error {
  explicit UnreachableTargetError(const std::string& msg) : std::domain_error(msg) {}
};

}  // namespace camp
