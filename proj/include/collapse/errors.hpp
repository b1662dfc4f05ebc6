#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

// Bad input values: non-normalized amplitudes, dimension mismatches, malformed matrices.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A matrix that should be a density operator has an eigenvalue below the positivity tolerance.
class PositivityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Scenario or run configuration is inconsistent (e.g. a rate floor that masks a physical rate).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during time integration.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class NotAlignedError : public std::runtime_error {
 public:
  NotAlignedError(const std::string& what, double final_distance)
      : std::runtime_error(what), final_distance_(final_distance) {}

  double final_distance() const noexcept { return final_distance_; }

 private:
  double final_distance_;
};

}  // namespace collapse
