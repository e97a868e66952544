#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "alslq/experiment.hpp"

using namespace alslq;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

Json single_run() {
  return Json::parse(R"({
    "version": 1,
    "task": "lq_sanity",
    "method": {"penalty": "phr", "rho": 2.0, "alpha": 1.0},
    "mpc": {"horizon": 1.0, "sim_duration": 0.5}
  })");
}

std::string error_path(const Json& doc, bool comparison) {
  try {
    parse_config(doc, comparison);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct CliRun {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("alslq_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliRun cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(ALSLQ_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = slurp(dir / "stdout.txt");
  r.stderr_text = slurp(dir / "stderr.txt");
  return r;
}

std::string config(const std::string& name) { return std::string(ALSLQ_CONFIG_DIR) + "/" + name; }

Trajectory theta_trajectory(const std::vector<double>& theta, double dt) {
  const TimeGrid g = TimeGrid::uniform(0.0, dt * static_cast<double>(theta.size() - 1), theta.size());
  std::vector<Eigen::VectorXd> x;
  for (double th : theta) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    v[1] = th;
    x.push_back(v);
  }
  return Trajectory(g, x);
}

}  // namespace

TEST(ParseConfig, DefaultsAreFilledIn) {
  const ExperimentConfig c = parse_config(single_run(), false);
  ASSERT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(c.methods[0].label, "phr");
  EXPECT_EQ(c.methods[0].dual.rule, DualRule::kPi1);
  EXPECT_EQ(c.mpc.mpc_rate, 100.0);
  EXPECT_EQ(c.mpc.initial_solve_iters, 10);
  EXPECT_EQ(c.mpc.plant_step, 1e-3);
  EXPECT_EQ(c.effective["mpc"]["rate_hz"], 100.0);
  EXPECT_EQ(c.effective["task_params"]["r"], 1.0);
}

TEST(ParseConfig, EffectiveConfigParsesToItself) {
  const ExperimentConfig a = parse_config(single_run(), false);
  const ExperimentConfig b = parse_config(a.effective, false);
  EXPECT_EQ(a.effective, b.effective);
  EXPECT_EQ(config_hash(a.effective), config_hash(b.effective));
}

TEST(ParseConfig, UnknownFieldNamesItsPath) {
  Json doc = single_run();
  doc["mpc"]["rate"] = 50;
  EXPECT_EQ(error_path(doc, false), "mpc.rate");
  doc = single_run();
  doc["method"]["gamma"] = 1;
  EXPECT_EQ(error_path(doc, false), "method.gamma");
  doc = single_run();
  doc["extra"] = true;
  EXPECT_EQ(error_path(doc, false), "extra");
}

TEST(ParseConfig, RequiredFields) {
  Json doc = single_run();
  doc.erase("version");
  EXPECT_EQ(error_path(doc, false), "version");
  doc = single_run();
  doc.erase("task");
  EXPECT_EQ(error_path(doc, false), "task");
  doc = single_run();
  doc["method"].erase("penalty");
  EXPECT_EQ(error_path(doc, false), "method.penalty");
  doc = single_run();
  doc["version"] = 2;
  EXPECT_EQ(error_path(doc, false), "version");
}

TEST(ParseConfig, InvalidValues) {
  Json doc = single_run();
  doc["method"]["rho"] = -1.0;
  EXPECT_EQ(error_path(doc, false), "method.rho");
  doc = single_run();
  doc["method"]["penalty"] = "l1";
  EXPECT_EQ(error_path(doc, false), "method.penalty");
  doc = single_run();
  doc["mpc"]["plant_step"] = 0.05;
  EXPECT_EQ(error_path(doc, false), "mpc.plant_step");
  doc = single_run();
  doc["task"] = "acrobot";
  EXPECT_EQ(error_path(doc, false), "task");
  doc = single_run();
  doc["task_params"] = {{"r", "big"}};
  EXPECT_EQ(error_path(doc, false), "task_params.r");
}

TEST(ParseConfig, ComparisonNeedsTwoUniquelyLabelledMethods) {
  Json doc = single_run();
  doc.erase("method");
  doc["methods"] = Json::array({{{"penalty", "phr"}}});
  EXPECT_EQ(error_path(doc, true), "methods");
  doc["methods"].push_back({{"penalty", "phr"}});
  EXPECT_EQ(error_path(doc, true), "methods[1].label");
  doc["methods"][1]["label"] = "phr2";
  const ExperimentConfig c = parse_config(doc, true);
  EXPECT_EQ(c.methods.size(), 2u);
  // A single-run document is not a comparison.
  EXPECT_EQ(error_path(single_run(), true), "method");
}

TEST(ConfigHash, SixteenHexDigitsAndSensitive) {
  const ExperimentConfig a = parse_config(single_run(), false);
  const std::string h = config_hash(a.effective);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(h, config_hash(parse_config(single_run(), false).effective));
  Json doc = single_run();
  doc["seed"] = 7;
  EXPECT_NE(h, config_hash(parse_config(doc, false).effective));
}

TEST(MakeTask, UnknownTaskThrows) { EXPECT_THROW(make_task("acrobot", Json::object(), 0), ConfigError); }

TEST(MakeTask, InitialStateNoiseIsSeeded) {
  const Json p = {{"initial_state_noise", 0.1}};
  const TaskSetup a = make_task("cartpole_swingup", p, 5);
  const TaskSetup b = make_task("cartpole_swingup", p, 5);
  const TaskSetup c = make_task("cartpole_swingup", p, 6);
  EXPECT_EQ(a.x0, b.x0);
  EXPECT_NE(a.x0, c.x0);
  EXPECT_EQ(make_task("cartpole_swingup", Json::object(), 5).x0, Eigen::VectorXd::Zero(4));
}

TEST(MakeTask, Defaults) {
  const TaskSetup cp = make_task("cartpole_swingup", Json::object(), 0);
  EXPECT_EQ(cp.ocp.model.state_dim(), 4);
  EXPECT_EQ(cp.ocp.constraints.num_inequalities(), 2);
  EXPECT_EQ(cp.violation_tolerance, 0.05);
  const TaskSetup maze = make_task("planar_maze", Json::object(), 0);
  EXPECT_EQ(maze.ocp.constraints.num_inequalities(), 20);
  EXPECT_EQ(maze.violation_tolerance, 5e-3);
}

TEST(TaskDuration, UprightNeedsContinuousHold) {
  const double pi = std::numbers::pi;
  // Upright from t = 0.2 on, sampled at 0.1 s.
  std::vector<double> th = {0.0, 1.0, pi, pi + 0.01, pi - 0.02, pi, pi, pi};
  EXPECT_NEAR(*upright_duration(theta_trajectory(th, 0.1)), 0.2, 1e-12);
  // A wobble resets the hold timer.
  th = {pi, pi, pi, pi + 0.2, pi, pi, pi, pi, pi, pi};
  EXPECT_NEAR(*upright_duration(theta_trajectory(th, 0.1)), 0.4, 1e-12);
  // Never held long enough.
  th = {0.0, pi, pi, pi, 0.0};
  EXPECT_FALSE(upright_duration(theta_trajectory(th, 0.1)).has_value());
  // theta = -pi is the same upright configuration.
  th = std::vector<double>(8, -pi);
  EXPECT_NEAR(*upright_duration(theta_trajectory(th, 0.1)), 0.0, 1e-12);
}

TEST(TaskDuration, GoalIsFirstEntry) {
  const TimeGrid g = TimeGrid::uniform(0.0, 2.0, 3);
  const Trajectory s(g, {Eigen::Vector4d(0, 0, 0, 0), Eigen::Vector4d(0.95, 0, 0, 0), Eigen::Vector4d(1, 0, 0, 0)});
  EXPECT_EQ(*goal_duration(s, Eigen::Vector2d(1.0, 0.0), 0.1), 1.0);
  EXPECT_FALSE(goal_duration(s, Eigen::Vector2d(5.0, 0.0), 0.1).has_value());
}

TEST(Summarize, ClassificationOrder) {
  const TaskSetup task = make_task("lq_sanity", Json::object(), 0);
  MpcResult r;
  r.state = Trajectory::constant(TimeGrid::uniform(0.0, 1.0, 3), Eigen::Vector2d::Zero());
  EXPECT_EQ(summarize("a", task, r).reason, "ok");
  EXPECT_EQ(summarize("a", task, r).exit_code, kExitSuccess);
  r.max_violation = 1.0;
  EXPECT_EQ(summarize("a", task, r).reason, "constraint_violation");
  r.aborted = true;
  EXPECT_EQ(summarize("a", task, r).reason, "solver_abort");
  EXPECT_EQ(summarize("a", task, r).exit_code, kExitSolverAbort);
  r = MpcResult{};
  r.state = Trajectory::constant(TimeGrid::uniform(0.0, 1.0, 3), Eigen::Vector2d(1.0, 0.0));
  EXPECT_EQ(summarize("a", task, r).reason, "goal_not_reached");
  EXPECT_EQ(summarize("a", task, r).exit_code, kExitTaskFailure);
}

TEST(MethodMpcConfig, TakesMethodFields) {
  Json doc = single_run();
  doc["method"]["rule"] = "pi2";
  const ExperimentConfig c = parse_config(doc, false);
  const TaskSetup task = make_task(c.task, c.task_params, c.seed);
  const MpcConfig m = method_mpc_config(c, c.methods[0], task);
  EXPECT_EQ(m.strategy.rho, 2.0);
  EXPECT_EQ(m.dual.rule, DualRule::kPi2);
  EXPECT_EQ(m.horizon, 1.0);
  EXPECT_EQ(m.initial_input.size(), 1);
}

TEST(Cli, RunWritesArtifacts) {
  const fs::path dir = scratch("run");
  const CliRun r = cli("run " + config("cartpole_phr.json") + " --output-dir " + (dir / "out").string(), dir);
  EXPECT_EQ(r.exit_code, 0) << r.stderr_text;
  for (const char* f : {"metrics.csv", "trajectory.csv", "solver_log.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  const Json summary = Json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["reason"], "ok");
  EXPECT_EQ(summary["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(summary["stability_warning"].is_null());
  EXPECT_LE(summary["task_duration"].get<double>(), 6.0);
  const std::string metrics = slurp(dir / "out" / "metrics.csv");
  EXPECT_EQ(metrics.rfind("# config_hash: " + summary["config_hash"].get<std::string>(), 0), 0u);
}

TEST(Cli, UnstableStepLengthWarnsButRuns) {
  const fs::path dir = scratch("unstable");
  const CliRun r = cli("run " + config("unstable_alpha.json") + " --quiet --output-dir " + (dir / "out").string(), dir);
  EXPECT_EQ(r.exit_code, 0) << r.stderr_text;
  EXPECT_NE(r.stderr_text.find("warning: phr"), std::string::npos);
  EXPECT_TRUE(r.stdout_text.empty());
  const Json summary = Json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_TRUE(summary["stability_warning"].is_string());
}

TEST(Cli, MissingConfigIsAConfigError) {
  const fs::path dir = scratch("missing");
  const CliRun r = cli("run " + (dir / "nope.json").string(), dir);
  EXPECT_EQ(r.exit_code, kExitConfigError);
  EXPECT_NE(r.stderr_text.find("nope.json"), std::string::npos);
}

TEST(Cli, CompareWithOneMethodPrintsUsage) {
  const fs::path dir = scratch("one_method");
  Json doc = single_run();
  doc.erase("method");
  doc["methods"] = Json::array({{{"penalty", "phr"}}});
  std::ofstream(dir / "cfg.json") << doc.dump();
  const CliRun r = cli("compare " + (dir / "cfg.json").string(), dir);
  EXPECT_EQ(r.exit_code, kExitConfigError);
  EXPECT_NE(r.stderr_text.find("methods"), std::string::npos);
  EXPECT_NE(r.stderr_text.find("usage:"), std::string::npos);
}

TEST(Cli, BadFieldReportsPath) {
  const fs::path dir = scratch("bad_field");
  Json doc = single_run();
  doc["mpc"]["rate_hz"] = -5;
  std::ofstream(dir / "cfg.json") << doc.dump();
  const CliRun r = cli("run " + (dir / "cfg.json").string(), dir);
  EXPECT_EQ(r.exit_code, kExitConfigError);
  EXPECT_NE(r.stderr_text.find("mpc.rate_hz"), std::string::npos);
}

TEST(Cli, CartPoleComparisonWritesTables) {
  const fs::path dir = scratch("compare");
  const CliRun r = cli("compare " + config("cartpole_compare.json") + " --output-dir " + (dir / "out").string(), dir);
  EXPECT_EQ(r.exit_code, 0) << r.stderr_text;
  const Json table = Json::parse(slurp(dir / "out" / "comparison.json"));
  ASSERT_EQ(table["methods"].size(), 4u);
  for (const auto& row : table["methods"]) {
    const std::string label = row["label"];
    EXPECT_TRUE(fs::exists(dir / "out" / label / "summary.json")) << label;
    EXPECT_TRUE(row.contains("solver_average_ms"));
    EXPECT_TRUE(row.contains("constraint_violation_l2_mean"));
    if (row["penalty"] != "relaxed_barrier") EXPECT_EQ(row["status"], "ok") << label;
  }
  EXPECT_EQ(table["ranking_by_violation"].size(), 4u);
  const std::string csv = slurp(dir / "out" / "comparison.csv");
  EXPECT_NE(csv.find("phr_violation_l2"), std::string::npos);
  EXPECT_NE(csv.find("nonslack_gamma"), std::string::npos);
}

TEST(Cli, MazeComparisonFlagsTheSoftBarrier) {
  const fs::path dir = scratch("maze");
  const CliRun r = cli("compare " + config("maze_compare.json") + " --output-dir " + (dir / "out").string(), dir);
  EXPECT_EQ(r.exit_code, 0) << r.stderr_text;
  const Json table = Json::parse(slurp(dir / "out" / "comparison.json"));
  for (const auto& row : table["methods"]) {
    const std::string label = row["label"];
    if (label == "phr" || label == "smooth_phr" || label == "nonslack") EXPECT_EQ(row["status"], "ok") << label;
    if (label == "barrier_soft") EXPECT_TRUE(row["flags"]["failed"].get<bool>());
  }
  EXPECT_NE(r.stdout_text.find("barrier_soft flagged"), std::string::npos);
}
