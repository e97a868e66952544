#include "alslq/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "alslq/errors.hpp"

namespace alslq {

void MpcConfig::validate() const {
  if (!(mpc_rate > 0.0)) throw std::invalid_argument("mpc: rate must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("mpc: horizon must be positive");
  if (time_step < 0.0) throw std::invalid_argument("mpc: time_step must be non-negative");
  if (node_spacing() > horizon) throw std::invalid_argument("mpc: node spacing exceeds the horizon");
  if (initial_solve_iters < 1) throw std::invalid_argument("mpc: initial_solve_iters must be at least 1");
  if (!(plant_step > 0.0)) throw std::invalid_argument("mpc: plant_step must be positive");
  if (plant_step > tick_period() * (1.0 + 1e-12)) {
    throw std::invalid_argument("mpc: plant_step must not exceed the MPC period");
  }
  if (!(sim_duration > 0.0)) throw std::invalid_argument("mpc: sim_duration must be positive");
  if (max_consecutive_failures < 1) throw std::invalid_argument("mpc: max_consecutive_failures must be at least 1");
  strategy.validate();
}

namespace {

double max_entry(const Trajectory& traj) {
  double m = 0.0;
  for (const auto& v : traj.values()) {
    if (v.size() > 0) m = std::max(m, v.maxCoeff());
  }
  return m;
}

Multipliers resample(const Multipliers& m, const TimeGrid& grid) {
  return Multipliers{resample(m.inequality, grid), resample(m.state_equality, grid)};
}

}  // namespace

MpcResult run_mpc(const OcpDefinition& ocp_template, const Eigen::VectorXd& x0, const MpcConfig& config) {
  config.validate();
  const int nx = ocp_template.model.state_dim();
  const int nu = ocp_template.model.input_dim();
  if (x0.size() != nx) throw DimensionError("run_mpc: initial state has the wrong size");

  MpcResult result;
  if (config.dual.rule != DualRule::kNone) {
    if (auto warning = check_stability(config.dual)) result.warnings.push_back(*warning);
  }

  const double period = config.tick_period();
  const int num_ticks = static_cast<int>(std::ceil(config.sim_duration * config.mpc_rate - 1e-9));
  const TimeGrid base = TimeGrid::with_step(0.0, config.horizon, config.node_spacing());
  const ConstraintFunction& ineq = ocp_template.constraints.inequalities;
  const bool has_inequalities = ineq.dim > 0;
  const bool has_state_equalities = ocp_template.constraints.num_state_equalities() > 0;
  const Eigen::VectorXd u_guess = config.initial_input.size() == nu ? config.initial_input : Eigen::VectorXd::Zero(nu);
  const IntegratorSettings plant = IntegratorSettings::fixed(config.plant_step);

  SlqSolver solver(config.solver);
  OcpDefinition ocp = ocp_template;
  Eigen::VectorXd x = x0;
  double t_now = 0.0;

  std::vector<double> times;
  std::vector<Eigen::VectorXd> states, inputs;

  Nominal nominal;
  MatrixTrajectory gains;
  Multipliers multipliers;
  AffinePolicy applied;
  bool have_policy = false;
  int consecutive_failures = 0;

  for (int k = 0; k < num_ticks; ++k) {
    const double t = k * period;
    ocp.horizon = base.shifted(t);
    ocp.x0 = x;

    MpcTickMetrics tick;
    tick.iteration = k;
    tick.sim_time = t;
    const std::size_t passes_before = solver.counters().riccati_passes;
    const auto start = std::chrono::steady_clock::now();
    try {
      IterationStats stats;
      AffinePolicy policy;
      if (!have_policy) {
        nominal = initial_nominal(ocp, u_guess, config.solver);
        multipliers = Multipliers::initial(ocp, config.strategy);
        Solution sol = solver.solve(ocp, nominal, multipliers, config.strategy, config.initial_solve_iters,
                                    config.initial_solve_tol);
        nominal = std::move(sol.nominal);
        policy = std::move(sol.policy);
        stats = sol.history.back();
      } else {
        AffinePolicy warm;
        warm.x_nominal = resample(nominal.x, ocp.horizon);
        warm.u_nominal = resample(nominal.u, ocp.horizon);
        warm.K = resample(gains, ocp.horizon);
        warm.u_ff = Trajectory::constant(ocp.horizon, Eigen::VectorXd::Zero(nu));
        multipliers = resample(multipliers, ocp.horizon);
        const Nominal warm_nominal =
            forward_rollout(ocp, warm, 0.0, config.solver.rollout_integrator).trajectories;
        IterationResult it = solver.iterate(ocp, warm_nominal, multipliers, config.strategy);
        nominal = std::move(it.nominal);
        policy = std::move(it.policy);
        stats = it.stats;
      }

      bool dual_updated = false;
      if (has_inequalities && config.dual.rule != DualRule::kNone) {
        multipliers.inequality =
            update_multiplier_trajectory(multipliers.inequality, evaluate_inequalities(ocp, nominal), config.dual);
        dual_updated = true;
      }
      if (has_state_equalities) {
        std::vector<Eigen::VectorXd> g(ocp.horizon.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] = ocp.constraints.state_equalities.value(nominal.x[i], nominal.u[i], ocp.horizon[i]);
        }
        multipliers.state_equality =
            update_equality_multipliers(multipliers.state_equality, Trajectory(ocp.horizon, std::move(g)), config.dual);
        dual_updated = true;
      }
      if (dual_updated) {
        ++result.dual_updates;
        tick.dual_updates = 1;
      }

      tick.merit = stats.merit;
      tick.cost = stats.cost;
      tick.regularization_shift = stats.regularization_shift;
      tick.violation_l2 = stats.violation_l2;
      tick.gamma = stats.gamma;
      tick.line_search_failed = stats.line_search_failed;
      tick.max_multiplier = max_entry(multipliers.inequality);
      gains = policy.K;
      applied = std::move(policy);
      have_policy = true;
      consecutive_failures = 0;
    } catch (const std::exception& e) {
      tick.failed = true;
      ++consecutive_failures;
      result.warnings.push_back("tick " + std::to_string(k) + ": " + e.what());
      if (!have_policy || consecutive_failures >= config.max_consecutive_failures) {
        result.aborted = true;
        result.abort_reason = "solver failed at tick " + std::to_string(k) + ": " + e.what();
      }
    }
    tick.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    tick.riccati_passes = solver.counters().riccati_passes - passes_before;
    result.riccati_passes += tick.riccati_passes;
    if (result.aborted) {
      result.ticks.push_back(tick);
      break;
    }

    // Plant interval under the time-varying affine policy.
    const double t_end = std::min((k + 1) * period, config.sim_duration);
    const TimeGrid plant_grid = TimeGrid::with_step(t, t_end - t, config.plant_step);
    const Flow flow = [&](const Eigen::VectorXd& xs, double ts) -> Eigen::VectorXd {
      return ocp.model.flow(xs, applied.input(ts, xs), ts);
    };
    Trajectory segment;
    try {
      segment = integrate_ode(flow, x, plant_grid, plant);
    } catch (const std::exception& e) {
      result.ticks.push_back(tick);
      result.aborted = true;
      result.abort_reason = std::string("plant integration failed: ") + e.what();
      break;
    }
    for (std::size_t i = 0; i + 1 < segment.size(); ++i) {
      const double ti = plant_grid[i];
      const Eigen::VectorXd ui = applied.input(ti, segment[i]);
      if (has_inequalities) {
        const Eigen::VectorXd h = ineq.value(segment[i], ui, ti);
        if (h.size() > 0) tick.max_violation = std::max(tick.max_violation, -h.minCoeff());
      }
      times.push_back(ti);
      states.push_back(segment[i]);
      inputs.push_back(ui);
    }
    x = segment.back();
    t_now = plant_grid.tf();
    result.max_violation = std::max(result.max_violation, tick.max_violation);
    result.ticks.push_back(tick);
  }

  if (have_policy && (times.empty() || t_now > times.back())) {
    const Eigen::VectorXd u_last = applied.input(t_now, x);
    if (has_inequalities) {
      const Eigen::VectorXd h = ineq.value(x, u_last, t_now);
      if (h.size() > 0) result.max_violation = std::max(result.max_violation, -h.minCoeff());
    }
    times.push_back(t_now);
    states.push_back(x);
    inputs.push_back(u_last);
  }
  if (times.size() >= 2) {
    const TimeGrid grid(std::move(times));
    result.state = Trajectory(grid, std::move(states));
    result.input = Trajectory(grid, std::move(inputs));
  }
  result.final_multipliers = multipliers;
  return result;
}

std::vector<MethodOutcome> compare_methods(const OcpDefinition& ocp_template, const Eigen::VectorXd& x0,
                                           const std::vector<MethodRun>& methods) {
  if (methods.size() < 2) throw std::invalid_argument("compare_methods: at least two methods are required");
  std::vector<MethodOutcome> outcomes(methods.size());
  std::vector<std::thread> workers;
  workers.reserve(methods.size());
  for (std::size_t i = 0; i < methods.size(); ++i) {
    workers.emplace_back([&, i] {
      MethodOutcome& out = outcomes[i];
      out.label = methods[i].label;
      try {
        out.result = run_mpc(ocp_template, x0, methods[i].config);
      } catch (const std::exception& e) {
        out.crashed = true;
        out.error = e.what();
      }
    });
  }
  for (auto& w : workers) w.join();
  return outcomes;
}

}  // namespace alslq
