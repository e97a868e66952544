#include "alslq/slq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "alslq/equality_projection.hpp"
#include "alslq/errors.hpp"
#include "alslq/metrics.hpp"

namespace alslq {

namespace {

void require_aligned(const Trajectory& traj, const TimeGrid& grid, Eigen::Index rows, const char* what) {
  if (!(traj.grid() == grid)) throw DimensionError(std::string(what) + ": not on the horizon grid");
  if (traj.rows() != rows) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(rows) + ", got " +
                         std::to_string(traj.rows()));
  }
}

void check_finite(const LqNode& n, std::size_t i) {
  if (!(n.A.allFinite() && n.B.allFinite() && n.Q.allFinite() && n.R.allFinite() && n.P.allFinite() &&
        n.q.allFinite() && n.r.allFinite() && std::isfinite(n.q0))) {
    throw NumericalError("quadratize: non-finite derivative at node " + std::to_string(i));
  }
}

Eigen::MatrixXd symmetric(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

}  // namespace

void OcpDefinition::validate() const {
  const int nx = model.state_dim();
  const int nu = model.input_dim();
  if (nx <= 0) throw DimensionError("ocp: model has no states");
  if (x0.size() != nx) {
    throw DimensionError("ocp: x0 has size " + std::to_string(x0.size()) + ", model expects " + std::to_string(nx));
  }
  if (horizon.size() < 2) throw DimensionError("ocp: horizon needs at least two nodes");
  if (!cost.intermediate || !cost.intermediate_quadratic || !cost.terminal || !cost.terminal_quadratic) {
    throw DimensionError("ocp: cost function is incomplete");
  }
  const auto check = [](const ConstraintFunction& c, const char* what) {
    if (c.dim > 0 && (!c.value || !c.jacobian)) throw DimensionError(std::string("ocp: ") + what + " lack callbacks");
  };
  check(constraints.inequalities, "inequalities");
  check(constraints.equalities, "equalities");
  check(constraints.state_equalities, "state equalities");
  if (constraints.num_equalities() > nu) {
    throw DimensionError("ocp: more state-input equalities than inputs");
  }
}

Multipliers Multipliers::initial(const TimeGrid& grid, const ConstraintSet& constraints,
                                 const PenaltyStrategy& strategy) {
  Multipliers m;
  m.inequality =
      Trajectory::constant(grid, Eigen::VectorXd::Constant(constraints.num_inequalities(), strategy.initial_multiplier()));
  m.state_equality = Trajectory::constant(grid, Eigen::VectorXd::Zero(constraints.num_state_equalities()));
  return m;
}

Multipliers Multipliers::initial(const OcpDefinition& ocp, const PenaltyStrategy& strategy) {
  return initial(ocp.horizon, ocp.constraints, strategy);
}

Eigen::VectorXd AffinePolicy::input(double t, const Eigen::VectorXd& x) const {
  return u_nominal.at(t) + gamma * u_ff.at(t) + K.at(t) * (x - x_nominal.at(t));
}

AffinePolicy AffinePolicy::open_loop(const Nominal& nominal) {
  AffinePolicy p;
  p.x_nominal = nominal.x;
  p.u_nominal = nominal.u;
  p.K = MatrixTrajectory::constant(nominal.u.grid(), Eigen::MatrixXd::Zero(nominal.u.rows(), nominal.x.rows()));
  p.u_ff = Trajectory::constant(nominal.u.grid(), Eigen::VectorXd::Zero(nominal.u.rows()));
  p.gamma = 0.0;
  return p;
}

Trajectory evaluate_inequalities(const OcpDefinition& ocp, const Nominal& nominal) {
  const auto& c = ocp.constraints.inequalities;
  std::vector<Eigen::VectorXd> values(nominal.x.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = c.dim > 0 ? c.value(nominal.x[i], nominal.u[i], nominal.x.time(i)) : Eigen::VectorXd::Zero(0);
  }
  return Trajectory(nominal.x.grid(), std::move(values));
}

MeritInfo evaluate_merit(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                         const PenaltyStrategy& strategy) {
  const TimeGrid& grid = ocp.horizon;
  const auto& cs = ocp.constraints;
  require_aligned(nominal.x, grid, ocp.model.state_dim(), "merit: state trajectory");
  require_aligned(nominal.u, grid, ocp.model.input_dim(), "merit: input trajectory");
  if (cs.num_inequalities() > 0 && strategy.uses_multipliers()) {
    require_aligned(multipliers.inequality, grid, cs.num_inequalities(), "merit: inequality multipliers");
  }
  if (cs.num_state_equalities() > 0) {
    require_aligned(multipliers.state_equality, grid, cs.num_state_equalities(), "merit: equality multipliers");
  }

  const std::size_t N = grid.size();
  std::vector<double> running(N), penalty(N);
  MeritInfo info;
  const Trajectory h = evaluate_inequalities(ocp, nominal);
  for (std::size_t i = 0; i < N; ++i) {
    const Eigen::VectorXd& x = nominal.x[i];
    const Eigen::VectorXd& u = nominal.u[i];
    const double t = grid[i];
    running[i] = ocp.cost.intermediate(x, u, t);
    penalty[i] = 0.0;
    if (cs.num_inequalities() > 0) {
      const Eigen::VectorXd nu = strategy.uses_multipliers()
                                     ? multipliers.inequality[i]
                                     : Eigen::VectorXd::Zero(cs.num_inequalities());
      penalty[i] += strategy.evaluate(h[i], nu).value;
    }
    if (cs.num_state_equalities() > 0) {
      const Eigen::VectorXd g = cs.state_equalities.value(x, u, t);
      penalty[i] += equality_al_penalty(g, multipliers.state_equality[i], strategy.rho).value;
      info.state_equality_residual = std::max(info.state_equality_residual, g.cwiseAbs().maxCoeff());
    }
    if (cs.num_equalities() > 0) {
      info.equality_residual =
          std::max(info.equality_residual, cs.equalities.value(x, u, t).cwiseAbs().maxCoeff());
    }
  }
  const double terminal = ocp.cost.terminal(nominal.x.back());
  info.cost = terminal + trapezoid(grid, running);
  info.penalty = trapezoid(grid, penalty);
  info.merit = info.cost + info.penalty;
  info.violation_l2 = violation_l2(h);
  info.max_violation = max_violation(h);
  return info;
}

LqApproximation quadratize(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                           const PenaltyStrategy& strategy, const SlqSettings& settings) {
  const TimeGrid& grid = ocp.horizon;
  const auto& cs = ocp.constraints;
  const int nx = ocp.model.state_dim();
  const int nu = ocp.model.input_dim();
  require_aligned(nominal.x, grid, nx, "quadratize: state trajectory");
  require_aligned(nominal.u, grid, nu, "quadratize: input trajectory");
  if (cs.num_inequalities() > 0 && strategy.uses_multipliers()) {
    require_aligned(multipliers.inequality, grid, cs.num_inequalities(), "quadratize: inequality multipliers");
  }
  if (cs.num_state_equalities() > 0) {
    require_aligned(multipliers.state_equality, grid, cs.num_state_equalities(), "quadratize: equality multipliers");
  }

  QuadratizeOptions options;
  options.exact_hessian = settings.exact_constraint_hessian;

  LqApproximation lq;
  lq.grid = grid;
  lq.nodes.resize(grid.size());
  if (cs.num_equalities() > 0) lq.equalities.resize(grid.size());

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd& x = nominal.x[i];
    const Eigen::VectorXd& u = nominal.u[i];
    const double t = grid[i];
    LqNode& n = lq.nodes[i];

    const Linearization lin = ocp.model.jacobians(x, u, t);
    n.A = lin.A;
    n.B = lin.B;
    n.d = Eigen::VectorXd::Zero(nx);

    const CostQuadratic c = ocp.cost.intermediate_quadratic(x, u, t);
    n.Q = symmetric(c.dxx);
    n.R = symmetric(c.duu);
    n.P = c.dux;
    n.q = c.dx;
    n.r = c.du;
    n.q0 = c.value;

    if (cs.num_inequalities() > 0) {
      const auto& ineq = cs.inequalities;
      const Eigen::VectorXd h = ineq.value(x, u, t);
      const Eigen::VectorXd nu_i =
          strategy.uses_multipliers() ? multipliers.inequality[i] : Eigen::VectorXd::Zero(ineq.dim);
      const PenaltyEvaluation eval = strategy.evaluate(h, nu_i);
      std::vector<ConstraintHessian> hessians;
      if (options.exact_hessian && ineq.has_hessians()) hessians = ineq.hessians(x, u, t);
      quadratize_constraint_term(ineq.jacobian(x, u, t), eval, n, hessians.empty() ? nullptr : &hessians, options);
    }
    if (cs.num_state_equalities() > 0) {
      const auto& eq = cs.state_equalities;
      const PenaltyEvaluation eval = equality_al_penalty(eq.value(x, u, t), multipliers.state_equality[i], strategy.rho);
      std::vector<ConstraintHessian> hessians;
      if (options.exact_hessian && eq.has_hessians()) hessians = eq.hessians(x, u, t);
      quadratize_constraint_term(eq.jacobian(x, u, t), eval, n, hessians.empty() ? nullptr : &hessians, options);
    }
    if (cs.num_equalities() > 0) {
      const ConstraintJacobian jac = cs.equalities.jacobian(x, u, t);
      lq.equalities[i] = LinearizedEquality{jac.dx, jac.du, cs.equalities.value(x, u, t)};
    }
    check_finite(n, i);
  }

  const TerminalQuadratic tq = ocp.cost.terminal_quadratic(nominal.x.back());
  lq.terminal.Qf = symmetric(tq.dxx);
  lq.terminal.qf = tq.dx;
  lq.terminal.qf0 = tq.value;
  if (!(lq.terminal.Qf.allFinite() && lq.terminal.qf.allFinite())) {
    throw NumericalError("quadratize: non-finite terminal derivative");
  }
  return lq;
}

RolloutResult forward_rollout(const OcpDefinition& ocp, const AffinePolicy& policy, double gamma,
                              const IntegratorSettings& integrator) {
  const Flow flow = [&](const Eigen::VectorXd& x, double t) -> Eigen::VectorXd {
    const Eigen::VectorXd u = policy.u_nominal.at(t) + gamma * policy.u_ff.at(t) + policy.K.at(t) * (x - policy.x_nominal.at(t));
    return ocp.model.flow(x, u, t);
  };
  RolloutResult result;
  result.trajectories.x = integrate_ode(flow, ocp.x0, ocp.horizon, integrator);
  std::vector<Eigen::VectorXd> inputs(ocp.horizon.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double t = ocp.horizon[i];
    inputs[i] = policy.u_nominal.at(t) + gamma * policy.u_ff.at(t) +
                policy.K.at(t) * (result.trajectories.x[i] - policy.x_nominal.at(t));
  }
  result.trajectories.u = Trajectory(ocp.horizon, std::move(inputs));
  return result;
}

Nominal initial_nominal(const OcpDefinition& ocp, const Eigen::VectorXd& u_guess, const SlqSettings& settings) {
  ocp.validate();
  if (u_guess.size() != ocp.model.input_dim()) throw DimensionError("initial_nominal: input guess has wrong size");
  const Flow flow = [&](const Eigen::VectorXd& x, double t) -> Eigen::VectorXd { return ocp.model.flow(x, u_guess, t); };
  Nominal nominal;
  nominal.x = integrate_ode(flow, ocp.x0, ocp.horizon, settings.rollout_integrator);
  nominal.u = Trajectory::constant(ocp.horizon, u_guess);
  return nominal;
}

LineSearchResult line_search(const OcpDefinition& ocp, const AffinePolicy& policy, const Nominal& nominal,
                             const MeritInfo& nominal_merit, double expected_decrease,
                             const Multipliers& multipliers, const PenaltyStrategy& strategy,
                             const SlqSettings& settings) {
  LineSearchResult result;
  double gamma = 1.0;
  for (int trial = 0; trial <= settings.max_backtracks; ++trial, gamma *= settings.backtracking_factor) {
    ++result.trials;
    try {
      RolloutResult rollout = forward_rollout(ocp, policy, gamma, settings.rollout_integrator);
      const MeritInfo merit = evaluate_merit(ocp, rollout.trajectories, multipliers, strategy);
      if (std::isfinite(merit.merit) &&
          merit.merit <= nominal_merit.merit - settings.armijo_sigma * gamma * expected_decrease) {
        result.gamma = gamma;
        result.trajectories = std::move(rollout.trajectories);
        result.merit = merit;
        return result;
      }
    } catch (const IntegrationError&) {
      // A diverging trial is a rejected step.
    } catch (const NumericalError&) {
    }
  }
  result.gamma = 0.0;
  result.failed = true;
  result.trajectories = nominal;
  result.merit = nominal_merit;
  return result;
}

IterationResult SlqSolver::iterate(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                                   const PenaltyStrategy& strategy) {
  const auto start = std::chrono::steady_clock::now();
  ocp.validate();
  strategy.validate();

  const LqApproximation lq = quadratize(ocp, nominal, multipliers, strategy, settings_);
  const bool projected = ocp.constraints.num_equalities() > 0;
  ProjectedLqApproximation projection;
  if (projected) projection = project_lq_approximation(lq);

  IterationStats stats;
  const LqApproximation solver_lq =
      regularize(projected ? projection.lq : lq, settings_.regularization_eps, &stats.regularization_shift);
  stats.input_hessian_condition = max_input_hessian_condition(solver_lq);

  const RiccatiResult riccati = backward_riccati(solver_lq, settings_.riccati);
  ++counters_.riccati_passes;
  stats.riccati_steps = riccati.stats.accepted_steps;

  // Expected decrease of the quadratic model along the feedforward, in solver coordinates.
  const std::size_t N = ocp.horizon.size();
  std::vector<double> decrease(N);
  for (std::size_t i = 0; i < N; ++i) {
    decrease[i] = riccati.u_ff[i].dot(solver_lq.nodes[i].R * riccati.u_ff[i]);
  }
  stats.expected_decrease = trapezoid(ocp.horizon, decrease);

  std::vector<Eigen::MatrixXd> K(N);
  std::vector<Eigen::VectorXd> u_ff(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (projected) {
      const InputReconstruction& rec = projection.reconstructions[i];
      K[i] = rec.feedback + rec.null_basis * riccati.K[i];
      u_ff[i] = rec.feedforward + rec.null_basis * riccati.u_ff[i];
    } else {
      K[i] = riccati.K[i];
      u_ff[i] = riccati.u_ff[i];
    }
    stats.feedforward_norm = std::max(stats.feedforward_norm, u_ff[i].norm());
  }

  IterationResult result;
  result.policy.x_nominal = nominal.x;
  result.policy.u_nominal = nominal.u;
  result.policy.K = MatrixTrajectory(ocp.horizon, std::move(K));
  result.policy.u_ff = Trajectory(ocp.horizon, std::move(u_ff));
  result.riccati = riccati.solution;

  const MeritInfo nominal_merit = evaluate_merit(ocp, nominal, multipliers, strategy);
  const LineSearchResult ls = line_search(ocp, result.policy, nominal, nominal_merit, stats.expected_decrease,
                                          multipliers, strategy, settings_);
  counters_.rollouts += static_cast<std::size_t>(ls.trials);

  result.policy.gamma = ls.gamma;
  result.nominal = ls.trajectories;

  stats.iteration = ++iteration_;
  stats.merit = ls.merit.merit;
  stats.cost = ls.merit.cost;
  stats.violation_l2 = ls.merit.violation_l2;
  stats.max_violation = ls.merit.max_violation;
  stats.equality_residual = std::max(ls.merit.equality_residual, ls.merit.state_equality_residual);
  stats.gamma = ls.gamma;
  stats.line_search_failed = ls.failed;
  stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.stats = stats;
  return result;
}

Solution SlqSolver::solve(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                          const PenaltyStrategy& strategy, int max_iters, double tol) {
  if (max_iters < 1) throw std::invalid_argument("solve: max_iters must be at least 1, got " + std::to_string(max_iters));
  Solution solution;
  solution.nominal = nominal;
  for (int k = 0; k < max_iters; ++k) {
    IterationResult it = iterate(ocp, solution.nominal, multipliers, strategy);
    solution.history.push_back(it.stats);
    solution.nominal = std::move(it.nominal);
    solution.policy = std::move(it.policy);
    solution.iterations = k + 1;
    // A rejected step (gamma = 0) also stops: the nominal is unchanged and a repeat would reject again.
    if (it.stats.gamma * it.stats.feedforward_norm < tol) {
      solution.converged = !it.stats.line_search_failed || it.stats.feedforward_norm < tol;
      solution.stalled = it.stats.line_search_failed;
      break;
    }
  }
  return solution;
}

IterationResult slq_iterate(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
                            const PenaltyStrategy& strategy, const SlqSettings& settings) {
  SlqSolver solver(settings);
  return solver.iterate(ocp, nominal, multipliers, strategy);
}

Solution solve(const OcpDefinition& ocp, const Nominal& nominal, const Multipliers& multipliers,
               const PenaltyStrategy& strategy, int max_iters, double tol, const SlqSettings& settings) {
  SlqSolver solver(settings);
  return solver.solve(ocp, nominal, multipliers, strategy, max_iters, tol);
}

}  // namespace alslq
