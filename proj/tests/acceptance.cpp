// Acceptance run: one PASS/FAIL line per criterion; exits nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "alslq/experiment.hpp"
#include "alslq/multiplier_update.hpp"
#include "alslq/penalties.hpp"
#include "alslq/slq.hpp"
#include "alslq/systems.hpp"
#include "kkt_oracle.hpp"
#include "problems.hpp"

using namespace alslq;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

PenaltyStrategy phr(double rho) {
  PenaltyStrategy s;
  s.rho = rho;
  return s;
}

// ---------------------------------------------------------------------------

void lqr_oracle() {
  const auto start = Clock::now();
  double s_err = 0.0, k_err = 0.0;

  alslq::testing::ScalarLq scalar;
  scalar.qf = 0.4;
  const OcpDefinition ocp1 = scalar.ocp(201);
  const IterationResult it1 = slq_iterate(ocp1, initial_nominal(ocp1, Eigen::VectorXd::Zero(1)), {}, phr(1.0));
  for (std::size_t i = 0; i < ocp1.horizon.size(); ++i) {
    s_err = std::max(s_err, std::abs(it1.riccati.S[i](0, 0) - scalar.S(ocp1.horizon[i])));
    k_err = std::max(k_err, std::abs(it1.policy.K[i](0, 0) - scalar.K(ocp1.horizon[i])));
  }

  const auto two = alslq::testing::HamiltonianLq::double_integrator();
  const OcpDefinition ocp2 = two.ocp(201);
  const IterationResult it2 = slq_iterate(ocp2, initial_nominal(ocp2, Eigen::VectorXd::Zero(1)), {}, phr(1.0));
  for (std::size_t i = 0; i < ocp2.horizon.size(); ++i) {
    s_err = std::max(s_err, (it2.riccati.S[i] - two.S(ocp2.horizon[i])).cwiseAbs().maxCoeff());
    k_err = std::max(k_err, (it2.policy.K[i] - two.K(ocp2.horizon[i])).cwiseAbs().maxCoeff());
  }
  const double runtime = seconds_since(start);
  report(1, "LQR oracle equivalence", s_err < 1e-4 && k_err < 1e-4 && runtime < 1.0,
         fmt("max|S-S_exact|=%.2e max|K-K_exact|=%.2e (tol 1e-4), runtime %.3f s (limit 1 s)", s_err, k_err,
             runtime));
}

// ---------------------------------------------------------------------------

using ScalarPenalty = std::function<PenaltyEvaluation(double)>;

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

double penalty_fd_error(const ScalarPenalty& p, double h) {
  const double eps = 1e-6 * std::max(1.0, std::abs(h));
  const PenaltyEvaluation e = p(h), plus = p(h + eps), minus = p(h - eps);
  const double fd1 = (plus.value - minus.value) / (2 * eps);
  const double fd2 = (plus.d_dh(0) - minus.d_dh(0)) / (2 * eps);
  return std::max(std::abs(fd1 - e.d_dh(0)) / std::max(1.0, std::abs(e.d_dh(0))),
                  std::abs(fd2 - e.d2_dh2(0)) / std::max(1.0, std::abs(e.d2_dh2(0))));
}

void derivative_suite() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> hdist(-3.0, 3.0), nudist(0.05, 5.0), rhodist(0.1, 10.0);
  const double dpsi = 0.5, mu = 0.3, delta = 0.2, margin = 1e-3;
  double penalty_err = 0.0;
  int penalty_samples = 0;
  while (penalty_samples < 1000) {
    const double h = hdist(rng), nu = nudist(rng), rho = rhodist(rng);
    // Stay away from the kinks (PHR, NonSlack) and the C2 junctions (SmoothPHR, barrier).
    if (std::abs(nu - rho * h) < margin || std::abs(h) < margin || std::abs(h - delta) < margin ||
        std::abs(h - (dpsi - 1.0) * nu / rho) < margin) {
      continue;
    }
    penalty_err = std::max({penalty_err, penalty_fd_error([&](double x) { return phr_penalty(v1(x), v1(nu), rho); }, h),
                            penalty_fd_error([&](double x) { return nonslack_penalty(v1(x), v1(nu), rho); }, h),
                            penalty_fd_error([&](double x) { return smooth_phr_penalty(v1(x), v1(nu), rho, dpsi); }, h),
                            penalty_fd_error([&](double x) { return relaxed_barrier_penalty(v1(x), mu, delta); }, h)});
    ++penalty_samples;
  }

  struct ModelCase {
    SystemModel model;
    SamplingBox box;
  };
  const auto box = [](Eigen::VectorXd xl, Eigen::VectorXd xu, Eigen::VectorXd ul, Eigen::VectorXd uu) {
    return SamplingBox{std::move(xl), std::move(xu), std::move(ul), std::move(uu)};
  };
  const std::vector<ModelCase> models = {
      {cartpole_model(CartPoleParams{}), box(Eigen::Vector4d(-2, -4, -5, -10), Eigen::Vector4d(2, 4, 5, 10), v1(-10), v1(10))},
      {planar_mover_model(default_maze()),
       box(Eigen::Vector4d(-1, -1, -2, -2), Eigen::Vector4d(5, 1, 2, 2), -Eigen::Vector2d::Constant(5),
           Eigen::Vector2d::Constant(5))},
      {double_integrator_model(), box(-Eigen::Vector2d::Ones(), Eigen::Vector2d::Ones(), v1(-1), v1(1))},
      {equality_toy_model(), box(-Eigen::Vector2d::Constant(3), Eigen::Vector2d::Constant(3),
                                 -Eigen::Vector2d::Ones(), Eigen::Vector2d::Ones())}};
  double model_err = 0.0;
  int model_samples = 0;
  bool models_pass = true;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const FiniteDifferenceReport r = finite_difference_check(models[i].model, models[i].box, 1000, 1e-5, 100 + i);
    model_err = std::max(model_err, r.max_relative_error);
    model_samples += r.samples;
    models_pass = models_pass && r.passed;
  }
  const double runtime = seconds_since(start);
  report(2, "Derivative consistency", penalty_err < 1e-5 && models_pass && model_err < 1e-5 && runtime < 10.0,
         fmt("penalties %d samples x 4 max rel err %.2e; dynamics %d samples max rel err %.2e (tol 1e-5), runtime "
             "%.2f s (limit 10 s)",
             penalty_samples, penalty_err, model_samples, model_err, runtime));
}

// ---------------------------------------------------------------------------

struct Mismatch {
  double value = 0.0, slope = 0.0, curvature = 0.0;
  double worst() const { return std::max({value, slope, curvature}); }
};

// Left and right neighbours of the junction, relative to max(1, |.|).
Mismatch junction_mismatch(const ScalarPenalty& p, double h_star) {
  const PenaltyEvaluation l = p(std::nextafter(h_star, -std::numeric_limits<double>::infinity()));
  const PenaltyEvaluation r = p(std::nextafter(h_star, std::numeric_limits<double>::infinity()));
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); };
  return {rel(l.value, r.value), rel(l.d_dh(0), r.d_dh(0)), rel(l.d2_dh2(0), r.d2_dh2(0))};
}

void c2_continuity() {
  double smooth = 0.0, barrier = 0.0;
  for (double dpsi : {0.1, 0.5, 0.9}) {
    for (double nu : {1e-3, 0.5, 20.0}) {
      for (double rho : {0.5, 10.0, 1000.0}) {
        smooth = std::max(smooth, junction_mismatch([&](double h) { return smooth_phr_penalty(v1(h), v1(nu), rho, dpsi); },
                                                    (dpsi - 1.0) * nu / rho)
                                      .worst());
      }
    }
  }
  for (double mu : {1.0, 1e-2, 1e-4}) {
    for (double delta : {0.5, 1e-2, 1e-4}) {
      barrier = std::max(barrier,
                         junction_mismatch([&](double h) { return relaxed_barrier_penalty(v1(h), mu, delta); }, delta)
                             .worst());
    }
  }
  report(3, "C2 continuity at junctions", smooth < 1e-10 && barrier < 1e-10,
         fmt("SmoothPHR worst mismatch %.2e, RelaxedBarrier worst mismatch %.2e (tol 1e-10)", smooth, barrier));
}

// ---------------------------------------------------------------------------

void pi1_identities() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // k-step contraction: each step rounds once, so the error bound grows by one ulp per step.
  double worst_ulps = 0.0;
  bool contraction_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    DualUpdateConfig c;
    c.rho = 0.1 + 10.0 * unit(rng);
    c.alpha = c.rho * (0.01 + 1.98 * unit(rng));
    const double nu0 = 0.1 + 5.0 * unit(rng);
    double nu = nu0;
    for (int k = 1; k <= 50; ++k) {
      nu = update_pi1(nu, 1e9, c);  // inactive: nu - alpha h is far below (1 - alpha/rho) nu
      const double exact = std::pow(1.0 - c.alpha / c.rho, k) * nu0;
      if (exact == 0.0) continue;
      const double ulps = std::abs(nu - exact) / (std::numeric_limits<double>::epsilon() * std::abs(exact));
      worst_ulps = std::max(worst_ulps, ulps / k);
      if (ulps > 4.0 * k) contraction_ok = false;
    }
  }
  int mismatches = 0;
  std::uniform_real_distribution<double> hdist(-5.0, 5.0);
  for (int i = 0; i < 10000; ++i) {
    DualUpdateConfig c;
    c.rho = 0.1 + 10.0 * unit(rng);
    c.alpha = c.rho;
    const double nu = 5.0 * unit(rng), h = hdist(rng);
    if (update_pi1(nu, h, c) != std::max(0.0, nu - c.rho * h)) ++mismatches;
  }
  report(4, "Pi1 contraction identity", contraction_ok && mismatches == 0,
         fmt("k-step error <= %.2f ulp per step over 200x50 steps (bound 4); alpha=rho vs max{0,nu-rho h}: %d of "
             "10000 differ (need 0)",
             worst_ulps, mismatches));
}

// ---------------------------------------------------------------------------

struct MethodRunResult {
  std::string label;
  RunSummary summary;
  double runtime = 0.0;
  double l2_mean = 0.0;
  double mean_solve_ms = 0.0;
};

MethodRunResult run_method(const ExperimentConfig& config, const MethodSpec& method, const TaskSetup& task) {
  MethodRunResult out;
  out.label = method.label;
  const auto start = Clock::now();
  MpcResult r = run_mpc(task.ocp, task.x0, method_mpc_config(config, method, task));
  out.runtime = seconds_since(start);
  double l2 = 0.0, ms = 0.0;
  for (const auto& t : r.ticks) {
    l2 += t.violation_l2;
    ms += t.solve_ms;
  }
  if (!r.ticks.empty()) {
    out.l2_mean = l2 / static_cast<double>(r.ticks.size());
    out.mean_solve_ms = ms / static_cast<double>(r.ticks.size());
  }
  out.summary = summarize(method.label, task, std::move(r));
  return out;
}

const MethodRunResult* find(const std::vector<MethodRunResult>& runs, const std::string& label) {
  for (const auto& r : runs) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

std::string duration_text(const RunSummary& s) {
  return s.task_duration ? fmt("%.3f s", *s.task_duration) : std::string("never");
}

void cartpole_criteria() {
  const ExperimentConfig config = load_config(std::string(ALSLQ_CONFIG_DIR) + "/cartpole_compare.json", true);
  const TaskSetup task = make_task(config.task, config.task_params, config.seed);
  std::vector<MethodRunResult> runs;
  for (const auto& m : config.methods) {
    if (m.strategy.kind == PenaltyStrategy::Kind::kRelaxedBarrier) continue;
    runs.push_back(run_method(config, m, task));
  }

  // 5: swing-up within 6 s and input violation within 0.05 N, under 2 min per method.
  bool ok5 = true;
  std::string detail5;
  for (const auto& r : runs) {
    const RunSummary& s = r.summary;
    const bool pass = !s.result.aborted && s.task_duration && *s.task_duration <= 6.0 &&
                      s.result.max_violation <= 0.05 && r.runtime < 120.0;
    ok5 = ok5 && pass;
    detail5 += fmt("%s%s upright %s, max violation %.4f N, runtime %.1f s", detail5.empty() ? "" : "; ", r.label.c_str(),
                   duration_text(s).c_str(), s.result.max_violation, r.runtime);
  }
  report(5, "Cart-pole swing-up under u_max = 5 N", ok5 && runs.size() == 3, detail5);

  // 6a: NonSlack has the worst violation-L2 among the AL methods.
  const MethodRunResult* nonslack = find(runs, "nonslack");
  const MethodRunResult* phr_run = find(runs, "phr");
  const MethodRunResult* smooth = find(runs, "smooth_phr");
  bool ok6a = nonslack && phr_run && smooth;
  if (ok6a) ok6a = nonslack->l2_mean >= phr_run->l2_mean && nonslack->l2_mean >= smooth->l2_mean;
  report(6, "(a) NonSlack worst violation-L2 on cart-pole", ok6a,
         ok6a || (nonslack && phr_run && smooth)
             ? fmt("mean violation-L2: phr %.5f, smooth_phr %.5f, nonslack %.5f", phr_run->l2_mean, smooth->l2_mean,
                   nonslack->l2_mean)
             : std::string("missing runs"));

  // 7: PHR with alpha = 0.1 rho versus alpha = rho.
  bool ok7 = false;
  std::string detail7 = "missing phr run";
  if (phr_run) {
    const MethodSpec* low = nullptr;
    for (const auto& m : config.methods) {
      if (m.label == "phr") low = &m;
    }
    MethodSpec high = *low;
    high.label = "phr_alpha_high";
    high.strategy.alpha = high.strategy.rho;
    high.dual = DualUpdateConfig::from(high.strategy);
    const MethodRunResult hi = run_method(config, high, task);
    const bool ratio_ok = std::abs(low->strategy.alpha - 0.1 * low->strategy.rho) <= 1e-12 * low->strategy.rho;
    ok7 = ratio_ok && phr_run->l2_mean <= hi.l2_mean;
    detail7 = fmt("rho=%g: alpha_low=%g violation-L2 %.5f (%s), alpha_high=%g violation-L2 %.5f (%s)",
                  low->strategy.rho, low->strategy.alpha, phr_run->l2_mean, phr_run->summary.reason.c_str(),
                  high.strategy.alpha, hi.l2_mean, hi.summary.reason.c_str());
  }
  report(7, "Step-length effect", ok7, detail7);

  // 9: counters from the PHR run.
  if (phr_run) {
    const MpcResult& r = phr_run->summary.result;
    bool later_ok = r.ticks.size() > 1;
    std::size_t bad = 0;
    for (std::size_t k = 1; k < r.ticks.size(); ++k) {
      if (r.ticks[k].riccati_passes != 1 || r.ticks[k].dual_updates != 1) ++bad;
    }
    later_ok = later_ok && bad == 0;
    const std::size_t first = r.ticks.empty() ? 0 : r.ticks[0].riccati_passes;
    report(9, "Real-time iteration contract", later_ok && first == 10,
           fmt("tick 0: %zu Riccati passes (expect 10); ticks 1..%zu: %zu deviate from 1 pass + 1 dual update",
               first, r.ticks.size() - 1, bad));

    double mean_ms = 0.0;
    for (const auto& run : runs) mean_ms = std::max(mean_ms, run.mean_solve_ms);
    std::printf("%s [sanity] Cart-pole solve time: worst per-method average %.2f ms (bound 250 ms)\n",
                mean_ms < 250.0 ? "PASS" : "FAIL", mean_ms);
    if (mean_ms >= 250.0) ++failures;
  } else {
    report(9, "Real-time iteration contract", false, "missing phr run");
  }
}

void maze_criterion() {
  const ExperimentConfig config = load_config(std::string(ALSLQ_CONFIG_DIR) + "/maze_compare.json", true);
  const TaskSetup task = make_task(config.task, config.task_params, config.seed);
  std::vector<MethodRunResult> runs;
  for (const auto& m : config.methods) runs.push_back(run_method(config, m, task));

  const MethodRunResult* stiff = find(runs, "barrier_stiff");
  const MethodRunResult* soft = find(runs, "barrier_soft");
  if (!stiff || !soft) {
    report(6, "(b) Maze barrier stiffness", false, "missing barrier runs");
    return;
  }
  const RunSummary& st = stiff->summary;
  const bool stiff_fails = st.result.aborted || st.result.max_violation > task.violation_tolerance;
  const double floor = soft->summary.result.ticks.empty() ? 0.0 : soft->summary.result.ticks.back().cost;
  double al_worst = 0.0;
  bool al_ok = true;
  std::string al_detail;
  for (const auto& r : runs) {
    if (r.label == "barrier_stiff" || r.label == "barrier_soft") continue;
    const double c = r.summary.result.ticks.empty() ? std::numeric_limits<double>::infinity()
                                                    : r.summary.result.ticks.back().cost;
    al_worst = std::max(al_worst, c);
    al_ok = al_ok && r.summary.exit_code == kExitSuccess;
    al_detail += fmt(" %s=%.3g(%s)", r.label.c_str(), c, r.summary.reason.c_str());
  }
  const bool floor_ok = floor > 0.0 && al_ok && al_worst * 100.0 <= floor;
  report(6, "(b) Maze barrier stiffness", stiff_fails && floor_ok,
         fmt("stiff barrier (mu=%g, delta=%g): %s, aborted=%d, max violation %.2e (tol %.0e), goal %s -> %s; soft "
             "barrier floor %.4g vs AL final cost%s -> %s",
             config.methods[4].strategy.mu, config.methods[4].strategy.delta, st.reason.c_str(),
             st.result.aborted ? 1 : 0, st.result.max_violation, task.violation_tolerance, duration_text(st).c_str(),
             stiff_fails ? "fails/violates" : "succeeds", floor, al_detail.c_str(),
             floor_ok ? "undercut >= 100x" : "not undercut 100x"));
}

// ---------------------------------------------------------------------------

void equality_projection() {
  OcpDefinition ocp = alslq::testing::make_ocp(
      equality_toy_model(),
      quadratic_tracking_cost(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2),
                              Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
      equality_toy_constraints(), TimeGrid::uniform(0.0, 2.0, 101), Eigen::Vector2d(1.0, 0.0));

  // Start off the constraint (u1 + u2 = 1) and iterate; after each accepted step the
  // linearized constraint C dx + D du + e is evaluated at the nodes with the step taken.
  Nominal nominal = initial_nominal(ocp, Eigen::Vector2d(0.5, 0.5));
  SlqSolver solver;
  double linearized = 0.0;
  for (int k = 0; k < 10; ++k) {
    const IterationResult it = solver.iterate(ocp, nominal, {}, phr(1.0));
    if (it.stats.gamma == 1.0) {
      for (std::size_t i = 0; i < ocp.horizon.size(); ++i) {
        const double t = ocp.horizon[i];
        const Eigen::VectorXd& x = nominal.x[i];
        const Eigen::VectorXd& u = nominal.u[i];
        const ConstraintJacobian J = ocp.constraints.equalities.jacobian(x, u, t);
        const Eigen::VectorXd e = ocp.constraints.equalities.value(x, u, t);
        const Eigen::VectorXd r = e + J.dx * (it.nominal.x[i] - x) + J.du * (it.nominal.u[i] - u);
        linearized = std::max(linearized, r.cwiseAbs().maxCoeff());
      }
    }
    nominal = it.nominal;
  }
  double nonlinear = 0.0;
  for (std::size_t i = 0; i < ocp.horizon.size(); ++i) {
    nonlinear = std::max(nonlinear,
                         ocp.constraints.equalities.value(nominal.x[i], nominal.u[i], ocp.horizon[i]).cwiseAbs().maxCoeff());
  }

  double kkt_gap = 0.0;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const alslq::testing::KktComparison c = alslq::testing::EqualityLqTranscription::random(seed).compare();
    kkt_gap = std::max({kkt_gap, c.max_input_gap, c.max_state_gap});
  }
  report(8, "Equality projection", linearized < 1e-8 && nonlinear < 1e-4 && kkt_gap < 1e-6,
         fmt("linearized residual %.2e (tol 1e-8), nonlinear residual %.2e (tol 1e-4), projected Riccati vs dense "
             "KKT %.2e (tol 1e-6, 5 seeds)",
             linearized, nonlinear, kkt_gap));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  lqr_oracle();
  derivative_suite();
  c2_continuity();
  pi1_identities();
  cartpole_criteria();
  maze_criterion();
  equality_projection();
  std::printf("%s: %d criterion line(s) failed, total runtime %.1f s\n", failures == 0 ? "ALL PASS" : "SOME FAIL",
              failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
