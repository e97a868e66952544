#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alslq/metrics.hpp"
#include "alslq/multiplier_update.hpp"
#include "alslq/penalties.hpp"
#include "alslq/slq.hpp"
#include "alslq/trajectory.hpp"

namespace alslq {

struct MpcConfig {
  double mpc_rate = 100.0;  // Hz
  double horizon = 3.0;     // s
  // Horizon node spacing; 0 means one node per MPC tick so that a shift is exactly one node.
  double time_step = 0.0;
  int initial_solve_iters = 10;
  // Early exit for the tick-0 solve. 0 runs all initial_solve_iters.
  double initial_solve_tol = 0.0;
  double plant_step = 1e-3;
  double sim_duration = 6.0;
  int max_consecutive_failures = 3;
  PenaltyStrategy strategy;
  DualUpdateConfig dual;
  SlqSettings solver;
  // Initial input guess for the tick-0 nominal; empty means zero.
  Eigen::VectorXd initial_input;

  double tick_period() const { return 1.0 / mpc_rate; }
  double node_spacing() const { return time_step > 0.0 ? time_step : tick_period(); }
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// One row per MPC call.
struct MpcTickMetrics {
  int iteration = 0;
  double sim_time = 0.0;
  double merit = 0.0;           // augmented Lagrangian of the predicted horizon
  double cost = 0.0;            // penalty-free cost of the predicted horizon
  double violation_l2 = 0.0;    // over the predicted horizon
  double max_violation = 0.0;   // closed loop, over the plant interval that follows the tick
  double gamma = 0.0;
  double solve_ms = 0.0;
  double max_multiplier = 0.0;
  double regularization_shift = 0.0;
  bool failed = false;          // solver threw; previous policy reused
  bool line_search_failed = false;
  std::size_t riccati_passes = 0;  // during this tick
  std::size_t dual_updates = 0;    // during this tick
};

struct MpcResult {
  Trajectory state;  // closed loop, sampled at plant steps
  Trajectory input;  // applied input at the same samples
  std::vector<MpcTickMetrics> ticks;
  double max_violation = 0.0;  // closed loop over the whole run
  bool aborted = false;
  std::string abort_reason;
  std::vector<std::string> warnings;
  std::size_t riccati_passes = 0;
  std::size_t dual_updates = 0;
  // Multipliers after the final tick (empty for rules that keep none).
  Multipliers final_multipliers;
};

/// Closed-loop real-time-iteration MPC. The horizon and x0 of `ocp_template`
/// are replaced at every tick; the plant is the same model integrated with
/// fixed-step RK4 at config.plant_step under the time-varying affine policy.
MpcResult run_mpc(const OcpDefinition& ocp_template, const Eigen::VectorXd& x0, const MpcConfig& config);

struct MethodRun {
  std::string label;
  MpcConfig config;
};

struct MethodOutcome {
  std::string label;
  MpcResult result;
  bool crashed = false;  // run_mpc threw; `error` holds the message
  std::string error;
};

/// Runs every method on the same problem and initial state in parallel worker
/// threads. Throws std::invalid_argument when fewer than two methods are given.
std::vector<MethodOutcome> compare_methods(const OcpDefinition& ocp_template, const Eigen::VectorXd& x0,
                                           const std::vector<MethodRun>& methods);

}  // namespace alslq
