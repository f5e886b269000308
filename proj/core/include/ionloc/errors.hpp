#pragma once

#include <stdexcept>
#include <string>

namespace ionloc {

// Raised when a numerical procedure cannot produce a trustworthy result:
// non-finite values, failed root bracketing, eigensolver non-convergence,
// integrator step-size underflow.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a convergence gate (unitarity, tail mass, band truncation)
// is breached.
class GateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad parameters, malformed configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ionloc
