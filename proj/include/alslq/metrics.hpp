#pragma once

#include "alslq/trajectory.hpp"

namespace alslq {

/// sqrt of the trapezoidal time integral of sum_i min(0, h_i(t))^2.
double violation_l2(const Trajectory& h);

/// Largest pointwise violation max_t max_i -min(0, h_i(t)).
double max_violation(const Trajectory& h);

/// Trapezoidal integral of a scalar sampled at the grid nodes.
double trapezoid(const TimeGrid& grid, const std::vector<double>& samples);

}  // namespace alslq
