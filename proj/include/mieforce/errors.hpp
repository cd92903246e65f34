#pragma once

#include <stdexcept>
#include <string>

namespace mieforce {

/// Argument outside the mathematical domain of an operation (zero argument,
/// negative weight, invalid multipole indices, non-passive material).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Intermediate quantity not representable in double precision.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Invalid configuration: bad grid sizes, truncation order, config-file fields.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Zero-width spectral or angular support where a finite width is required.
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quadrature failed to reach its tolerance; carries the achieved residual.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double residual)
      : std::runtime_error(what + " (achieved residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace mieforce
