#include "alslq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "alslq/cost.hpp"
#include "alslq/systems.hpp"

namespace alslq {

using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Schema helpers. Every accessor records the value it used in `effective`.

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

const Json& object_at(const Json& doc, const std::string& path) {
  require(doc.is_object(), path.empty() ? "<root>" : path, "expected a JSON object");
  return doc;
}

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    require(allowed.count(it.key()) > 0, join(path, it.key()), "unknown field");
  }
}

double number(const Json& obj, const std::string& path, const std::string& key, double fallback, Json& effective) {
  double v = fallback;
  if (obj.contains(key)) {
    require(obj[key].is_number(), join(path, key), "expected a number");
    v = obj[key].get<double>();
    require(std::isfinite(v), join(path, key), "must be finite");
  }
  effective[key] = v;
  return v;
}

double positive(const Json& obj, const std::string& path, const std::string& key, double fallback, Json& effective) {
  const double v = number(obj, path, key, fallback, effective);
  require(v > 0.0, join(path, key), "must be positive");
  return v;
}

double non_negative(const Json& obj, const std::string& path, const std::string& key, double fallback,
                    Json& effective) {
  const double v = number(obj, path, key, fallback, effective);
  require(v >= 0.0, join(path, key), "must be non-negative");
  return v;
}

long long integer(const Json& obj, const std::string& path, const std::string& key, long long fallback, long long lo,
                  Json& effective) {
  long long v = fallback;
  if (obj.contains(key)) {
    require(obj[key].is_number_integer(), join(path, key), "expected an integer");
    v = obj[key].get<long long>();
  }
  require(v >= lo, join(path, key), "must be at least " + std::to_string(lo));
  effective[key] = v;
  return v;
}

bool boolean(const Json& obj, const std::string& path, const std::string& key, bool fallback, Json& effective) {
  bool v = fallback;
  if (obj.contains(key)) {
    require(obj[key].is_boolean(), join(path, key), "expected true or false");
    v = obj[key].get<bool>();
  }
  effective[key] = v;
  return v;
}

std::string text(const Json& obj, const std::string& path, const std::string& key, const std::string& fallback,
                 Json& effective) {
  std::string v = fallback;
  if (obj.contains(key)) {
    require(obj[key].is_string(), join(path, key), "expected a string");
    v = obj[key].get<std::string>();
  }
  effective[key] = v;
  return v;
}

Eigen::VectorXd vector(const Json& obj, const std::string& path, const std::string& key,
                       const Eigen::VectorXd& fallback, Json& effective) {
  Eigen::VectorXd v = fallback;
  if (obj.contains(key)) {
    const Json& a = obj[key];
    require(a.is_array() && a.size() == static_cast<std::size_t>(fallback.size()), join(path, key),
            "expected an array of " + std::to_string(fallback.size()) + " numbers");
    for (std::size_t i = 0; i < a.size(); ++i) {
      require(a[i].is_number(), join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
      v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
  }
  require(v.allFinite(), join(path, key), "must be finite");
  effective[key] = std::vector<double>(v.data(), v.data() + v.size());
  return v;
}

Eigen::VectorXd non_negative_vector(const Json& obj, const std::string& path, const std::string& key,
                                    const Eigen::VectorXd& fallback, Json& effective) {
  Eigen::VectorXd v = vector(obj, path, key, fallback, effective);
  require((v.array() >= 0.0).all(), join(path, key), "entries must be non-negative");
  return v;
}

// ---------------------------------------------------------------------------

MethodSpec parse_method(const Json& doc, const std::string& path, Json& effective) {
  object_at(doc, path);
  check_keys(doc, path, {"label", "penalty", "rho", "alpha", "mu", "delta", "delta_psi", "nu_min", "rule"});
  require(doc.contains("penalty"), join(path, "penalty"), "required field is missing");
  MethodSpec m;
  effective = Json::object();
  const std::string penalty = text(doc, path, "penalty", "", effective);
  try {
    m.strategy.kind = penalty_kind_from_string(penalty);
  } catch (const std::exception&) {
    throw ConfigError(join(path, "penalty"), "unknown penalty '" + penalty +
                                                 "' (expected phr, nonslack, smooth_phr or relaxed_barrier)");
  }
  m.label = text(doc, path, "label", penalty, effective);
  require(!m.label.empty() && m.label.find_first_of("/\\ ") == std::string::npos, join(path, "label"),
          "must be a non-empty name without spaces or slashes");
  const PenaltyStrategy defaults;
  m.strategy.rho = positive(doc, path, "rho", defaults.rho, effective);
  m.strategy.alpha = non_negative(doc, path, "alpha", defaults.alpha, effective);
  m.strategy.mu = positive(doc, path, "mu", defaults.mu, effective);
  m.strategy.delta = positive(doc, path, "delta", defaults.delta, effective);
  m.strategy.delta_psi = number(doc, path, "delta_psi", defaults.delta_psi, effective);
  require(m.strategy.delta_psi > 0.0 && m.strategy.delta_psi < 1.0, join(path, "delta_psi"), "must lie in (0, 1)");
  m.strategy.nu_min = positive(doc, path, "nu_min", defaults.nu_min, effective);
  m.dual = DualUpdateConfig::from(m.strategy);
  const std::string rule = text(doc, path, "rule", std::string(to_string(m.dual.rule)), effective);
  try {
    m.dual.rule = dual_rule_from_string(rule);
  } catch (const std::exception&) {
    throw ConfigError(join(path, "rule"), "unknown rule '" + rule + "' (expected pi1, pi2, pi3 or none)");
  }
  return m;
}

void parse_mpc(const Json& doc, MpcConfig& mpc, Json& effective) {
  const std::string path = "mpc";
  object_at(doc, path);
  check_keys(doc, path,
             {"rate_hz", "horizon", "time_step", "initial_solve_iters", "initial_solve_tol", "plant_step",
              "sim_duration", "max_consecutive_failures"});
  effective = Json::object();
  mpc.mpc_rate = positive(doc, path, "rate_hz", 100.0, effective);
  mpc.horizon = positive(doc, path, "horizon", 3.0, effective);
  mpc.time_step = non_negative(doc, path, "time_step", 0.0, effective);
  mpc.initial_solve_iters = static_cast<int>(integer(doc, path, "initial_solve_iters", 10, 1, effective));
  mpc.initial_solve_tol = non_negative(doc, path, "initial_solve_tol", 0.0, effective);
  mpc.plant_step = positive(doc, path, "plant_step", 1e-3, effective);
  mpc.sim_duration = positive(doc, path, "sim_duration", 6.0, effective);
  mpc.max_consecutive_failures = static_cast<int>(integer(doc, path, "max_consecutive_failures", 3, 1, effective));
  require(mpc.plant_step <= mpc.tick_period() * (1.0 + 1e-12), join(path, "plant_step"),
          "must not exceed the MPC period 1/rate_hz");
  require(mpc.node_spacing() <= mpc.horizon, join(path, "time_step"), "must not exceed the horizon");
}

void parse_solver(const Json& doc, SlqSettings& s, Json& effective) {
  const std::string path = "solver";
  object_at(doc, path);
  check_keys(doc, path,
             {"rollout_integrator", "rollout_abs_tol", "rollout_rel_tol", "rollout_step", "riccati_abs_tol",
              "riccati_rel_tol", "max_integrator_steps", "regularization_eps", "armijo_sigma", "backtracking_factor",
              "max_backtracks", "exact_constraint_hessian"});
  effective = Json::object();
  const std::string mode = text(doc, path, "rollout_integrator", "adaptive", effective);
  require(mode == "adaptive" || mode == "fixed", join(path, "rollout_integrator"), "expected 'adaptive' or 'fixed'");
  const double abs_tol = positive(doc, path, "rollout_abs_tol", 1e-8, effective);
  const double rel_tol = positive(doc, path, "rollout_rel_tol", 1e-6, effective);
  const double step = positive(doc, path, "rollout_step", 1e-3, effective);
  const double ric_abs = positive(doc, path, "riccati_abs_tol", 1e-8, effective);
  const double ric_rel = positive(doc, path, "riccati_rel_tol", 1e-6, effective);
  const auto max_steps = static_cast<std::size_t>(integer(doc, path, "max_integrator_steps", 100000, 1, effective));
  s.rollout_integrator = mode == "adaptive" ? IntegratorSettings::adaptive(abs_tol, rel_tol, max_steps)
                                            : IntegratorSettings::fixed(step);
  s.rollout_integrator.max_steps = max_steps;
  s.riccati.integrator = IntegratorSettings::adaptive(ric_abs, ric_rel, max_steps);
  s.regularization_eps = positive(doc, path, "regularization_eps", 1e-6, effective);
  s.armijo_sigma = number(doc, path, "armijo_sigma", 1e-4, effective);
  require(s.armijo_sigma > 0.0 && s.armijo_sigma < 1.0, join(path, "armijo_sigma"), "must lie in (0, 1)");
  s.backtracking_factor = number(doc, path, "backtracking_factor", 0.5, effective);
  require(s.backtracking_factor > 0.0 && s.backtracking_factor < 1.0, join(path, "backtracking_factor"),
          "must lie in (0, 1)");
  s.max_backtracks = static_cast<int>(integer(doc, path, "max_backtracks", 10, 0, effective));
  s.exact_constraint_hessian = boolean(doc, path, "exact_constraint_hessian", false, effective);
}

// ---------------------------------------------------------------------------
// Tasks

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::VectorXd noisy(const Eigen::VectorXd& x0, double sigma, std::uint64_t seed) {
  if (sigma == 0.0) return x0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::VectorXd x = x0;
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += normal(rng);
  return x;
}

std::optional<double> near_target(const Trajectory& state, const Eigen::VectorXd& target, double radius) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    if ((state[i] - target).norm() < radius) return state.time(i);
  }
  return std::nullopt;
}

TaskSetup cartpole_task(const Json& p, std::uint64_t seed, Json& eff) {
  const std::string path = "task_params";
  check_keys(p, path,
             {"u_max", "q_diag", "r", "qf_diag", "initial_state", "initial_state_noise", "violation_tolerance",
              "cart_mass", "pole_mass", "pole_length", "gravity"});
  CartPoleParams params;
  params.cart_mass = positive(p, path, "cart_mass", params.cart_mass, eff);
  params.pole_mass = positive(p, path, "pole_mass", params.pole_mass, eff);
  params.pole_length = positive(p, path, "pole_length", params.pole_length, eff);
  params.gravity = positive(p, path, "gravity", params.gravity, eff);
  const double u_max = positive(p, path, "u_max", 5.0, eff);
  const Eigen::VectorXd q = non_negative_vector(p, path, "q_diag", vec({2.0, 10.0, 0.1, 0.1}), eff);
  const double r = positive(p, path, "r", 2.0, eff);
  const Eigen::VectorXd qf = non_negative_vector(p, path, "qf_diag", vec({2.0, 10.0, 0.5, 0.5}), eff);
  const Eigen::VectorXd x0 = vector(p, path, "initial_state", Eigen::VectorXd::Zero(4), eff);
  const double noise = non_negative(p, path, "initial_state_noise", 0.0, eff);

  TaskSetup task;
  task.violation_tolerance = non_negative(p, path, "violation_tolerance", 0.05, eff);
  task.ocp.model = cartpole_model(params);
  const Eigen::VectorXd target = vec({0.0, std::numbers::pi, 0.0, 0.0});
  task.ocp.cost = quadratic_tracking_cost(q.asDiagonal(), r * Eigen::MatrixXd::Identity(1, 1), qf.asDiagonal(),
                                          target, Eigen::VectorXd::Zero(1));
  task.ocp.constraints = box_input_constraints(Eigen::VectorXd::Constant(1, u_max), 4);
  task.x0 = noisy(x0, noise, seed);
  task.ocp.x0 = task.x0;
  task.initial_input = Eigen::VectorXd::Zero(1);
  task.state_names = {"p", "theta", "p_dot", "theta_dot"};
  task.input_names = {"force"};
  task.task_duration = [](const Trajectory& s) { return upright_duration(s); };
  return task;
}

TaskSetup maze_task(const Json& p, std::uint64_t seed, Json& eff) {
  const std::string path = "task_params";
  check_keys(p, path,
             {"q_diag", "r", "qf_diag", "initial_state", "initial_state_noise", "goal", "goal_radius",
              "violation_tolerance", "mass", "damping", "obstacles"});
  PlanarMoverParams params = default_maze();
  params.mass = positive(p, path, "mass", params.mass, eff);
  params.damping = non_negative(p, path, "damping", params.damping, eff);
  const Eigen::VectorXd goal = vector(p, path, "goal", params.goal, eff);
  params.goal = goal.head<2>();
  if (p.contains("obstacles")) {
    const Json& list = p["obstacles"];
    require(list.is_array(), join(path, "obstacles"), "expected an array of [x, y, radius] triples");
    params.obstacles.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string item = join(path, "obstacles") + "[" + std::to_string(i) + "]";
      require(list[i].is_array() && list[i].size() == 3 && list[i][0].is_number() && list[i][1].is_number() &&
                  list[i][2].is_number(),
              item, "expected [x, y, radius]");
      const double radius = list[i][2].get<double>();
      require(radius > 0.0, item, "radius must be positive");
      params.obstacles.push_back({Eigen::Vector2d(list[i][0].get<double>(), list[i][1].get<double>()), radius});
    }
  }
  Json obstacles = Json::array();
  for (const auto& o : params.obstacles) obstacles.push_back({o.center.x(), o.center.y(), o.radius});
  eff["obstacles"] = obstacles;

  const Eigen::VectorXd q = non_negative_vector(p, path, "q_diag", vec({1.0, 1.0, 0.1, 0.1}), eff);
  const double r = positive(p, path, "r", 0.1, eff);
  const Eigen::VectorXd qf = non_negative_vector(p, path, "qf_diag", vec({5.0, 5.0, 1.0, 1.0}), eff);
  const Eigen::VectorXd x0 = vector(p, path, "initial_state", vec({0.0, 0.25, 0.0, 0.0}), eff);
  const double noise = non_negative(p, path, "initial_state_noise", 0.0, eff);
  const double radius = positive(p, path, "goal_radius", 0.1, eff);

  TaskSetup task;
  task.violation_tolerance = non_negative(p, path, "violation_tolerance", 5e-3, eff);
  task.ocp.model = planar_mover_model(params);
  const Eigen::VectorXd target = vec({params.goal.x(), params.goal.y(), 0.0, 0.0});
  task.ocp.cost = quadratic_tracking_cost(q.asDiagonal(), r * Eigen::MatrixXd::Identity(2, 2), qf.asDiagonal(),
                                          target, Eigen::VectorXd::Zero(2));
  task.ocp.constraints = obstacle_constraints(params.obstacles, {0, 1}, 4, 2);
  task.x0 = noisy(x0, noise, seed);
  task.ocp.x0 = task.x0;
  task.initial_input = Eigen::VectorXd::Zero(2);
  task.state_names = {"px", "py", "vx", "vy"};
  task.input_names = {"fx", "fy"};
  const Eigen::Vector2d g = params.goal;
  task.task_duration = [g, radius](const Trajectory& s) { return goal_duration(s, g, radius); };
  return task;
}

TaskSetup lq_task(const Json& p, std::uint64_t seed, Json& eff) {
  const std::string path = "task_params";
  check_keys(p, path, {"q_diag", "r", "qf_diag", "initial_state", "initial_state_noise"});
  const Eigen::VectorXd q = non_negative_vector(p, path, "q_diag", vec({1.0, 1.0}), eff);
  const double r = positive(p, path, "r", 1.0, eff);
  const Eigen::VectorXd qf = non_negative_vector(p, path, "qf_diag", vec({1.0, 1.0}), eff);
  const Eigen::VectorXd x0 = vector(p, path, "initial_state", Eigen::VectorXd::Zero(2), eff);
  const double noise = non_negative(p, path, "initial_state_noise", 0.0, eff);
  TaskSetup task;
  task.ocp.model = double_integrator_model();
  task.ocp.cost = quadratic_tracking_cost(q.asDiagonal(), r * Eigen::MatrixXd::Identity(1, 1), qf.asDiagonal(),
                                          Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1));
  task.x0 = noisy(x0, noise, seed);
  task.ocp.x0 = task.x0;
  task.initial_input = Eigen::VectorXd::Zero(1);
  task.state_names = {"p", "v"};
  task.input_names = {"u"};
  task.task_duration = [](const Trajectory& s) { return near_target(s, Eigen::VectorXd::Zero(2), 0.05); };
  return task;
}

TaskSetup equality_task(const Json& p, std::uint64_t seed, Json& eff) {
  const std::string path = "task_params";
  check_keys(p, path, {"q_diag", "r", "qf_diag", "initial_state", "initial_state_noise"});
  const Eigen::VectorXd q = non_negative_vector(p, path, "q_diag", vec({1.0, 1.0}), eff);
  const double r = positive(p, path, "r", 1.0, eff);
  const Eigen::VectorXd qf = non_negative_vector(p, path, "qf_diag", vec({1.0, 1.0}), eff);
  const Eigen::VectorXd x0 = vector(p, path, "initial_state", vec({1.0, 0.0}), eff);
  const double noise = non_negative(p, path, "initial_state_noise", 0.0, eff);
  TaskSetup task;
  task.ocp.model = equality_toy_model();
  task.ocp.constraints = equality_toy_constraints();
  task.ocp.cost = quadratic_tracking_cost(q.asDiagonal(), r * Eigen::MatrixXd::Identity(2, 2), qf.asDiagonal(),
                                          Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  task.x0 = noisy(x0, noise, seed);
  task.ocp.x0 = task.x0;
  task.initial_input = Eigen::VectorXd::Zero(2);
  task.state_names = {"q", "q_dot"};
  task.input_names = {"u1", "u2"};
  task.task_duration = [](const Trajectory& s) { return near_target(s, Eigen::VectorXd::Zero(2), 0.05); };
  return task;
}

TaskSetup build_task(const std::string& task, const Json& params, std::uint64_t seed, Json& eff) {
  object_at(params, "task_params");
  if (task == "cartpole_swingup") return cartpole_task(params, seed, eff);
  if (task == "planar_maze") return maze_task(params, seed, eff);
  if (task == "lq_sanity") return lq_task(params, seed, eff);
  if (task == "equality_toy") return equality_task(params, seed, eff);
  throw ConfigError("task", "unknown task '" + task + "'");
}

// ---------------------------------------------------------------------------
// Artifacts

struct Percentiles {
  double mean = 0.0, p50 = 0.0, p90 = 0.0, p99 = 0.0, max = 0.0;
};

Percentiles percentiles(std::vector<double> v) {
  Percentiles p;
  if (v.empty()) return p;
  std::sort(v.begin(), v.end());
  const auto at = [&](double q) {
    const std::size_t i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(i, v.size() - 1)];
  };
  p.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  p.p50 = at(0.5);
  p.p90 = at(0.9);
  p.p99 = at(0.99);
  p.max = v.back();
  return p;
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << std::setprecision(12);
  return os;
}

void write_metrics_csv(const std::filesystem::path& file, const std::string& hash, const MpcResult& r) {
  std::ofstream os = open_output(file);
  os << "# config_hash: " << hash << "\n";
  os << "iteration,sim_time,cost,violation_l2,max_violation,gamma,solve_ms\n";
  for (const auto& t : r.ticks) {
    os << t.iteration << "," << t.sim_time << "," << t.cost << "," << t.violation_l2 << "," << t.max_violation << ","
       << t.gamma << "," << t.solve_ms << "\n";
  }
}

void write_solver_log(const std::filesystem::path& file, const std::string& hash, const MpcResult& r) {
  std::ofstream os = open_output(file);
  os << "# config_hash: " << hash << "\n";
  os << "iteration,merit,cost,violation_l2,gamma,regularization_shift,solve_ms,max_multiplier,riccati_passes,"
        "dual_updates,failed\n";
  for (const auto& t : r.ticks) {
    os << t.iteration << "," << t.merit << "," << t.cost << "," << t.violation_l2 << "," << t.gamma << ","
       << t.regularization_shift << "," << t.solve_ms << "," << t.max_multiplier << "," << t.riccati_passes << ","
       << t.dual_updates << "," << (t.failed ? 1 : 0) << "\n";
  }
}

void write_trajectory_csv(const std::filesystem::path& file, const std::string& hash, const TaskSetup& task,
                          const MpcResult& r) {
  std::ofstream os = open_output(file);
  os << "# config_hash: " << hash << "\n";
  std::vector<std::string> names = task.state_names;
  names.insert(names.end(), task.input_names.begin(), task.input_names.end());
  if (r.state.empty()) {
    os << "time";
    for (const auto& n : names) os << "," << n;
    os << "\n";
    return;
  }
  std::vector<Eigen::VectorXd> rows(r.state.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].resize(r.state.rows() + r.input.rows());
    rows[i] << r.state[i], r.input[i];
  }
  write_csv(os, Trajectory(r.state.grid(), std::move(rows)), names);
}

double closed_loop_cost(const TaskSetup& task, const MpcResult& r) {
  if (r.state.size() < 2) return 0.0;
  std::vector<double> running(r.state.size());
  for (std::size_t i = 0; i < running.size(); ++i) {
    running[i] = task.ocp.cost.intermediate(r.state[i], r.input[i], r.state.time(i));
  }
  return trapezoid(r.state.grid(), running);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json summary_json(const RunSummary& s, const TaskSetup& task, const ExperimentConfig& config,
                  const MethodSpec& method, const std::string& hash) {
  const MpcResult& r = s.result;
  std::vector<double> ms, l2;
  for (const auto& t : r.ticks) {
    ms.push_back(t.solve_ms);
    l2.push_back(t.violation_l2);
  }
  const Percentiles timing = percentiles(ms);
  const Percentiles violation = percentiles(l2);
  Json j;
  j["config_hash"] = hash;
  j["task"] = config.task;
  j["label"] = method.label;
  j["penalty"] = std::string(to_string(method.strategy.kind));
  j["exit_code"] = s.exit_code;
  j["reason"] = s.reason;
  j["error"] = s.crashed ? Json(s.error) : Json(nullptr);
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  j["ticks"] = r.ticks.size();
  j["final_cost"] = r.ticks.empty() ? Json(nullptr) : Json(r.ticks.back().cost);
  j["closed_loop_cost"] = closed_loop_cost(task, r);
  j["task_duration"] = optional_number(s.task_duration);
  j["violation"] = {{"closed_loop_max", r.max_violation},
                    {"tolerance", task.violation_tolerance},
                    {"l2_mean", violation.mean},
                    {"l2_peak", violation.max},
                    {"l2_final", r.ticks.empty() ? 0.0 : r.ticks.back().violation_l2}};
  j["timing_ms"] = {{"mean", timing.mean}, {"p50", timing.p50}, {"p90", timing.p90}, {"p99", timing.p99},
                    {"max", timing.max}};
  j["riccati_passes"] = r.riccati_passes;
  j["dual_updates"] = r.dual_updates;
  const auto stability = method.dual.rule == DualRule::kNone ? std::nullopt : check_stability(method.dual);
  j["stability_warning"] = stability ? Json(*stability) : Json(nullptr);
  j["warnings"] = r.warnings;
  j["effective_config"] = config.effective;
  return j;
}

void write_run_artifacts(const std::filesystem::path& dir, const RunSummary& s, const TaskSetup& task,
                         const ExperimentConfig& config, const MethodSpec& method, const std::string& hash) {
  std::filesystem::create_directories(dir);
  write_metrics_csv(dir / "metrics.csv", hash, s.result);
  write_trajectory_csv(dir / "trajectory.csv", hash, task, s.result);
  write_solver_log(dir / "solver_log.csv", hash, s.result);
  std::ofstream os = open_output(dir / "summary.json");
  os << summary_json(s, task, config, method, hash).dump(2) << "\n";
}

RunSummary execute(const ExperimentConfig& config, const MethodSpec& method, const TaskSetup& task) {
  RunSummary s;
  try {
    s = summarize(method.label, task, run_mpc(task.ocp, task.x0, method_mpc_config(config, method, task)));
  } catch (const std::exception& e) {
    s.label = method.label;
    s.crashed = true;
    s.error = e.what();
    s.exit_code = kExitSolverAbort;
    s.reason = "solver_abort";
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const Json& doc, bool comparison) {
  object_at(doc, "");
  check_keys(doc, "", {"version", "task", "seed", "output_dir", "method", "methods", "mpc", "solver", "task_params"});
  ExperimentConfig config;
  Json& eff = config.effective;
  eff = Json::object();

  require(doc.contains("version"), "version", "required field is missing");
  config.version = static_cast<int>(integer(doc, "", "version", kConfigVersion, 0, eff));
  require(config.version == kConfigVersion, "version",
          "unsupported schema version " + std::to_string(config.version) + " (expected " +
              std::to_string(kConfigVersion) + ")");
  require(doc.contains("task"), "task", "required field is missing");
  config.task = text(doc, "", "task", "", eff);
  require(config.task == "cartpole_swingup" || config.task == "planar_maze" || config.task == "lq_sanity" ||
              config.task == "equality_toy",
          "task", "unknown task '" + config.task + "' (expected cartpole_swingup, planar_maze, lq_sanity or equality_toy)");
  config.seed = static_cast<std::uint64_t>(integer(doc, "", "seed", 0, 0, eff));
  config.output_dir = text(doc, "", "output_dir", "results", eff);
  require(!config.output_dir.empty(), "output_dir", "must not be empty");

  std::set<std::string> labels;
  if (comparison) {
    require(!doc.contains("method"), "method", "a comparison config lists its methods under 'methods'");
    require(doc.contains("methods") && doc["methods"].is_array(), "methods", "expected an array of method objects");
    require(doc["methods"].size() >= 2, "methods", "a comparison needs at least two methods");
    Json list = Json::array();
    for (std::size_t i = 0; i < doc["methods"].size(); ++i) {
      const std::string path = "methods[" + std::to_string(i) + "]";
      Json m_eff;
      config.methods.push_back(parse_method(doc["methods"][i], path, m_eff));
      require(labels.insert(config.methods.back().label).second, path + ".label",
              "duplicate label '" + config.methods.back().label + "'");
      list.push_back(m_eff);
    }
    eff["methods"] = list;
  } else {
    require(!doc.contains("methods"), "methods", "a single run takes one 'method' object");
    require(doc.contains("method"), "method", "required field is missing");
    Json m_eff;
    config.methods.push_back(parse_method(doc["method"], "method", m_eff));
    eff["method"] = m_eff;
  }

  Json mpc_eff;
  parse_mpc(doc.contains("mpc") ? doc["mpc"] : Json::object(), config.mpc, mpc_eff);
  eff["mpc"] = mpc_eff;
  Json solver_eff;
  parse_solver(doc.contains("solver") ? doc["solver"] : Json::object(), config.solver, solver_eff);
  eff["solver"] = solver_eff;

  const Json params = doc.contains("task_params") ? doc["task_params"] : Json::object();
  object_at(params, "task_params");
  Json params_eff = Json::object();
  (void)build_task(config.task, params, config.seed, params_eff);
  config.task_params = params;
  eff["task_params"] = params_eff;
  return config;
}

ExperimentConfig load_config(const std::string& path, bool comparison) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, "cannot open config file");
  Json doc;
  try {
    doc = Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, comparison);
}

std::string config_hash(const Json& effective) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : effective.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TaskSetup make_task(const std::string& task, const Json& params, std::uint64_t seed) {
  Json eff = Json::object();
  return build_task(task, params, seed, eff);
}

std::optional<double> upright_duration(const Trajectory& state, double tol, double hold) {
  std::optional<double> since;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double err = std::abs(std::remainder(state[i][1] - std::numbers::pi, 2.0 * std::numbers::pi));
    if (err < tol) {
      if (!since) since = state.time(i);
      if (state.time(i) - *since >= hold - 1e-9) return *since;
    } else {
      since.reset();
    }
  }
  return std::nullopt;
}

std::optional<double> goal_duration(const Trajectory& state, const Eigen::Vector2d& goal, double radius) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    if ((state[i].head<2>() - goal).norm() < radius) return state.time(i);
  }
  return std::nullopt;
}

RunSummary summarize(const std::string& label, const TaskSetup& task, MpcResult result) {
  RunSummary s;
  s.label = label;
  s.result = std::move(result);
  if (task.task_duration && !s.result.state.empty()) s.task_duration = task.task_duration(s.result.state);
  if (s.result.aborted) {
    s.exit_code = kExitSolverAbort;
    s.reason = "solver_abort";
  } else if (s.result.max_violation > task.violation_tolerance) {
    s.exit_code = kExitTaskFailure;
    s.reason = "constraint_violation";
  } else if (!s.task_duration) {
    s.exit_code = kExitTaskFailure;
    s.reason = "goal_not_reached";
  } else {
    s.exit_code = kExitSuccess;
    s.reason = "ok";
  }
  return s;
}

MpcConfig method_mpc_config(const ExperimentConfig& config, const MethodSpec& method, const TaskSetup& task) {
  MpcConfig mpc = config.mpc;
  mpc.strategy = method.strategy;
  mpc.dual = method.dual;
  mpc.solver = config.solver;
  mpc.initial_input = task.initial_input;
  return mpc;
}

RunSummary run_experiment(const ExperimentConfig& config, std::ostream* log) {
  if (config.methods.size() != 1) throw std::invalid_argument("run_experiment: expected exactly one method");
  const MethodSpec& method = config.methods.front();
  const TaskSetup task = make_task(config.task, config.task_params, config.seed);
  const std::string hash = config_hash(config.effective);
  if (log) *log << "running " << config.task << " with " << method.label << " (config " << hash << ")\n";
  RunSummary s = execute(config, method, task);
  write_run_artifacts(config.output_dir, s, task, config, method, hash);
  if (log) {
    *log << method.label << ": " << s.reason << ", max violation " << s.result.max_violation << ", task duration "
         << (s.task_duration ? std::to_string(*s.task_duration) + " s" : std::string("n/a")) << "\n";
  }
  return s;
}

ComparisonReport run_comparison(const ExperimentConfig& config, std::ostream* log) {
  if (config.methods.size() < 2) throw std::invalid_argument("run_comparison: at least two methods are required");
  const TaskSetup task = make_task(config.task, config.task_params, config.seed);
  const std::string hash = config_hash(config.effective);
  if (log) {
    *log << "comparing " << config.methods.size() << " methods on " << config.task << " (config " << hash << ")\n";
  }

  std::vector<MethodRun> runs;
  for (const auto& m : config.methods) runs.push_back({m.label, method_mpc_config(config, m, task)});
  std::vector<MethodOutcome> outcomes = compare_methods(task.ocp, task.x0, runs);

  ComparisonReport report;
  const std::filesystem::path root(config.output_dir);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    RunSummary s;
    if (outcomes[i].crashed) {
      s.label = outcomes[i].label;
      s.crashed = true;
      s.error = outcomes[i].error;
      s.exit_code = kExitSolverAbort;
      s.reason = "solver_abort";
    } else {
      s = summarize(outcomes[i].label, task, std::move(outcomes[i].result));
    }
    write_run_artifacts(root / s.label, s, task, config, config.methods[i], hash);
    if (log) *log << s.label << ": " << s.reason << ", max violation " << s.result.max_violation << "\n";
    report.runs.push_back(std::move(s));
  }

  // Aligned per-tick table.
  {
    std::ofstream os = open_output(root / "comparison.csv");
    os << "# config_hash: " << hash << "\n";
    os << "iteration,sim_time";
    for (const auto& s : report.runs) {
      for (const char* c : {"cost", "violation_l2", "max_violation", "gamma", "solve_ms"}) os << "," << s.label << "_" << c;
    }
    os << "\n";
    std::size_t rows = 0;
    for (const auto& s : report.runs) rows = std::max(rows, s.result.ticks.size());
    const double period = config.mpc.tick_period();
    for (std::size_t k = 0; k < rows; ++k) {
      os << k << "," << static_cast<double>(k) * period;
      for (const auto& s : report.runs) {
        if (k < s.result.ticks.size()) {
          const auto& t = s.result.ticks[k];
          os << "," << t.cost << "," << t.violation_l2 << "," << t.max_violation << "," << t.gamma << ","
             << t.solve_ms;
        } else {
          os << ",,,,,";
        }
      }
      os << "\n";
    }
  }

  // Per-method summary table.
  Json table;
  table["config_hash"] = hash;
  table["task"] = config.task;
  Json rows = Json::array();
  std::vector<std::pair<double, std::string>> order;
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const RunSummary& s = report.runs[i];
    std::vector<double> ms, l2;
    for (const auto& t : s.result.ticks) {
      ms.push_back(t.solve_ms);
      l2.push_back(t.violation_l2);
    }
    const Percentiles timing = percentiles(ms);
    const Percentiles violation = percentiles(l2);
    Json row;
    row["label"] = s.label;
    row["penalty"] = std::string(to_string(config.methods[i].strategy.kind));
    row["solver_average_ms"] = timing.mean;
    row["solver_peak_ms"] = timing.max;
    row["constraint_violation_l2_mean"] = violation.mean;
    row["constraint_violation_l2_peak"] = violation.max;
    row["closed_loop_max_violation"] = s.result.max_violation;
    row["task_duration"] = optional_number(s.task_duration);
    row["status"] = s.reason;
    row["flags"] = {{"crashed", s.crashed},
                    {"aborted", s.result.aborted},
                    {"violating", s.result.max_violation > task.violation_tolerance},
                    {"goal_not_reached", !s.task_duration.has_value()},
                    {"failed", s.exit_code != kExitSuccess}};
    rows.push_back(row);
    order.emplace_back(s.crashed ? std::numeric_limits<double>::infinity() : violation.mean, s.label);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Json ranking = Json::array();
  for (const auto& o : order) ranking.push_back(o.second);
  table["methods"] = rows;
  table["ranking_by_violation"] = ranking;
  table["effective_config"] = config.effective;
  std::ofstream os = open_output(root / "comparison.json");
  os << table.dump(2) << "\n";
  return report;
}

}  // namespace alslq
