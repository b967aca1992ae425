#pragma once

#include <stdexcept>
#include <string>

namespace rydgate {

/// Unknown species, level label or config key.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Argument outside the mathematical domain of an operation (T <= 0, L = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The resonance condition kw/k = 2 + Ω2/(NΩ1) has no solution with Ω2 > 0.
class InfeasibleScheme : public DomainError {
 public:
  using DomainError::DomainError;
};

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or inconsistent integrator / run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rydgate
