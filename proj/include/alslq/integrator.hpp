#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "alslq/trajectory.hpp"

namespace alslq {

struct IntegratorSettings {
  enum class Mode { kFixedRk4, kAdaptiveRk45 };

  Mode mode = Mode::kAdaptiveRk45;
  // Fixed mode: maximum sub-step; each grid interval is split into equal sub-steps.
  double step = 1e-3;
  // Adaptive mode: per-step local error bound abs_tol + rel_tol * |x| (componentwise).
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  // Total number of attempted steps (accepted + rejected) before giving up.
  std::size_t max_steps = 100000;

  static IntegratorSettings fixed(double step);
  static IntegratorSettings adaptive(double abs_tol, double rel_tol, std::size_t max_steps = 100000);

  /// Throws std::invalid_argument on non-positive tolerances/step or zero step budget.
  void validate() const;
};

struct IntegrationStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t flow_evaluations = 0;
};

using Flow = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, double t)>;
// Applied to the state after every accepted step (e.g. re-symmetrization).
using StepProjection = std::function<void(Eigen::VectorXd& x)>;

/// Integrates x' = flow(x, t) from x0 at grid.t0() and samples the solution at
/// every grid node. The integrator lands exactly on each node, so flows that
/// are only piecewise smooth between nodes are handled without error-control
/// penalties at the kinks.
///
/// Throws IntegrationError on step-budget exhaustion or a non-finite state.
Trajectory integrate_ode(const Flow& flow, const Eigen::VectorXd& x0, const TimeGrid& grid,
                         const IntegratorSettings& settings, IntegrationStats* stats = nullptr,
                         const StepProjection& projection = {});

}  // namespace alslq
