#pragma once

#include <stdexcept>
#include <string>

namespace alslq {

// Raised when an ODE integration cannot complete: step budget exhausted,
// non-finite state, or a norm cap exceeded.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for inconsistent sizes between trajectories, models and constraints.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when the numerical state of the solver leaves its valid domain
// (non-finite derivatives, rank-deficient equality Jacobians, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace alslq
