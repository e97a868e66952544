#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "alslq/constraints.hpp"
#include "alslq/cost.hpp"
#include "alslq/integrator.hpp"
#include "alslq/lq_approximation.hpp"
#include "alslq/penalties.hpp"
#include "alslq/riccati.hpp"
#include "alslq/system_model.hpp"
#include "alslq/trajectory.hpp"

namespace alslq {

/// min Phi(x(tf)) + int L(x, u, t) dt  s.t.  x' = f(x, u, t), path constraints, x(t0) = x0.
struct OcpDefinition {
  SystemModel model;
  CostFunction cost;
  ConstraintSet constraints;
  TimeGrid horizon;
  Eigen::VectorXd x0;

  /// Throws DimensionError on inconsistent sizes.
  void validate() const;
};

/// State and input trajectories on the horizon grid.
struct Nominal {
  Trajectory x;
  Trajectory u;
};

/// Multiplier estimates for the inequalities and for pure-state equalities.
struct Multipliers {
  Trajectory inequality;
  Trajectory state_equality;

  /// Constant initial estimates on `grid` (strategy.initial_multiplier() for inequalities, 0 for equalities).
  static Multipliers initial(const OcpDefinition& ocp, const PenaltyStrategy& strategy);
  static Multipliers initial(const TimeGrid& grid, const ConstraintSet& constraints,
                             const PenaltyStrategy& strategy);
};

/// u(t, x) = u_nominal(t) + gamma * u_ff(t) + K(t) (x - x_nominal(t)).
struct AffinePolicy {
  Trajectory x_nominal;
  Trajectory u_nominal;
  MatrixTrajectory K;
  Trajectory u_ff;
  double gamma = 1.0;

  Eigen::VectorXd input(double t, const Eigen::VectorXd& x) const;
  /// K = 0, u_ff = 0 around the given nominal.
  static AffinePolicy open_loop(const Nominal& nominal);
};

struct SlqSettings {
  IntegratorSettings rollout_integrator = IntegratorSettings::adaptive(1e-8, 1e-6);
  RiccatiSettings riccati;
  double regularization_eps = 1e-6;
  double armijo_sigma = 1e-4;
  double backtracking_factor = 0.5;
  int max_backtracks = 10;
  bool exact_constraint_hessian = false;
};

/// Merit and feasibility measures of a trajectory pair.
struct MeritInfo {
  double merit = 0.0;          // augmented Lagrangian (cost + penalties)
  double cost = 0.0;           // penalty-free cost
  double penalty = 0.0;
  double violation_l2 = 0.0;   // sqrt(int sum min(0, h_i)^2 dt)
  double max_violation = 0.0;  // max over nodes of max_i -min(0, h_i)
  double equality_residual = 0.0;        // max |g(x, u)| of state-input equalities
  double state_equality_residual = 0.0;  // max |g(x)| of pure-state equalities
};

MeritInfo evaluate_merit(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                         const PenaltyStrategy& strategy);

/// Inequality values h(x(t), u(t), t) at every node.
Trajectory evaluate_inequalities(const OcpDefinition& ocp, const Nominal& nominal);

/// LQ approximation of the augmented Lagrangian around `nominal`, with the
/// state-input equalities linearized and attached for projection.
///
/// Throws NumericalError if any derivative is non-finite.
LqApproximation quadratize(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                           const PenaltyStrategy& strategy, const SlqSettings& settings = {});

struct RolloutResult {
  Nominal trajectories;
};

/// Integrates the dynamics from ocp.x0 under `policy` with its feedforward
/// scaled by `gamma`; inputs are recorded at the grid nodes.
RolloutResult forward_rollout(const OcpDefinition& ocp, const AffinePolicy& policy, double gamma,
                              const IntegratorSettings& integrator);

/// Nominal obtained by rolling out a constant input from ocp.x0.
Nominal initial_nominal(const OcpDefinition& ocp, const Eigen::VectorXd& u_guess, const SlqSettings& settings = {});

struct LineSearchResult {
  double gamma = 0.0;
  bool failed = false;
  int trials = 0;
  Nominal trajectories;
  MeritInfo merit;
};

/// Armijo backtracking on the feedforward step: tries gamma = 1, c, c^2, ...
/// and accepts the first with merit(gamma) <= merit(0) - sigma * gamma * expected_decrease.
/// On failure returns gamma = 0 with the nominal unchanged and `failed` set.
LineSearchResult line_search(const OcpDefinition& ocp, const AffinePolicy& policy, const Nominal& nominal,
                             const MeritInfo& nominal_merit, double expected_decrease,
                             const Multipliers& multipliers, const PenaltyStrategy& strategy,
                             const SlqSettings& settings = {});

struct IterationStats {
  int iteration = 0;
  double merit = 0.0;
  double cost = 0.0;
  double violation_l2 = 0.0;
  double max_violation = 0.0;
  double equality_residual = 0.0;
  double gamma = 0.0;
  bool line_search_failed = false;
  double regularization_shift = 0.0;
  double input_hessian_condition = 0.0;
  double feedforward_norm = 0.0;  // max over nodes of |u_ff(t)|
  double expected_decrease = 0.0;
  std::size_t riccati_steps = 0;
  double wall_ms = 0.0;
};

struct IterationResult {
  Nominal nominal;        // trajectories after the accepted step
  AffinePolicy policy;    // anchored at the previous nominal, gamma = accepted step
  RiccatiSolution riccati;
  IterationStats stats;
};

struct Solution {
  Nominal nominal;
  AffinePolicy policy;
  std::vector<IterationStats> history;
  int iterations = 0;
  bool converged = false;
  // Ended on a rejected line search with the feedforward still above tol.
  bool stalled = false;
};

struct SolverCounters {
  std::size_t riccati_passes = 0;
  std::size_t rollouts = 0;
};

/// Sequential linear-quadratic solver for the augmented-Lagrangian OCP. One
/// instance is used by one thread at a time.
class SlqSolver {
 public:
  explicit SlqSolver(SlqSettings settings = {}) : settings_(std::move(settings)) {}

  /// quadratize -> project -> regularize -> backward Riccati -> line search.
  IterationResult iterate(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                          const PenaltyStrategy& strategy);

  /// Repeats iterate() until gamma * max_t |u_ff(t)| < tol or max_iters is reached.
  /// A rejected line search gives gamma = 0 and therefore ends the loop.
  /// Throws std::invalid_argument when max_iters < 1.
  Solution solve(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                 const PenaltyStrategy& strategy, int max_iters, double tol);

  const SlqSettings& settings() const { return settings_; }
  const SolverCounters& counters() const { return counters_; }
  void reset_counters() { counters_ = {}; }

 private:
  SlqSettings settings_;
  SolverCounters counters_;
  int iteration_ = 0;
};

/// Convenience wrappers around a temporary SlqSolver.
IterationResult slq_iterate(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                            const PenaltyStrategy& strategy, const SlqSettings& settings = {});
Solution solve(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
               const PenaltyStrategy& strategy, int max_iters, double tol, const SlqSettings& settings = {});

}  // namespace alslq
