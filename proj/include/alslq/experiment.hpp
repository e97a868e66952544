#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "alslq/mpc.hpp"

namespace alslq {

/// Schema violation; `path` names the offending field, e.g. "mpc.rate_hz".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct MethodSpec {
  std::string label;
  PenaltyStrategy strategy;
  DualUpdateConfig dual;
};

struct ExperimentConfig {
  int version = 1;
  std::string task;
  std::uint64_t seed = 0;
  std::string output_dir = "results";
  std::vector<MethodSpec> methods;  // exactly one for a single run
  MpcConfig mpc;                    // strategy and dual fields are taken from each method
  SlqSettings solver;
  nlohmann::ordered_json task_params = nlohmann::ordered_json::object();

  // Fully defaulted document in the input schema; parsing it again gives the same config.
  nlohmann::ordered_json effective;
};

inline constexpr int kConfigVersion = 1;

/// Validates and applies defaults. `comparison` selects the "methods" list
/// (at least two entries) instead of a single "method" object.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc, bool comparison);
/// Throws ConfigError with the path when the file is missing or is not JSON.
ExperimentConfig load_config(const std::string& path, bool comparison);

/// 64-bit FNV-1a of the effective config's compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::ordered_json& effective);

/// An OCP template plus everything needed to judge the closed loop.
struct TaskSetup {
  OcpDefinition ocp;
  Eigen::VectorXd x0;
  Eigen::VectorXd initial_input;
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  // Largest closed-loop inequality violation still counted as feasible.
  double violation_tolerance = 0.0;
  // First time the task is complete, if ever.
  std::function<std::optional<double>(const Trajectory& state)> task_duration;
};

/// Builds the named task from `params` (missing keys take task defaults).
/// Initial-state noise, if configured, is drawn from a generator seeded with `seed`.
/// Throws ConfigError for unknown tasks or parameters.
TaskSetup make_task(const std::string& task, const nlohmann::ordered_json& params, std::uint64_t seed);

/// First time |theta - pi| < tol holds continuously for `hold` seconds.
std::optional<double> upright_duration(const Trajectory& state, double tol = 0.05, double hold = 0.5);

/// First time the planar position is within `radius` of `goal`.
std::optional<double> goal_duration(const Trajectory& state, const Eigen::Vector2d& goal, double radius = 0.1);

enum ExitCode : int { kExitSuccess = 0, kExitConfigError = 2, kExitSolverAbort = 3, kExitTaskFailure = 4 };

struct RunSummary {
  std::string label;
  MpcResult result;
  std::optional<double> task_duration;
  bool crashed = false;
  std::string error;
  int exit_code = kExitSuccess;
  std::string reason;  // machine-readable: "ok", "solver_abort", "goal_not_reached", "constraint_violation"
};

/// Classifies an MPC result against the task's success criteria.
RunSummary summarize(const std::string& label, const TaskSetup& task, MpcResult result);

/// MpcConfig for one method of `config`.
MpcConfig method_mpc_config(const ExperimentConfig& config, const MethodSpec& method, const TaskSetup& task);

/// Executes a single-method config and writes metrics.csv, trajectory.csv,
/// solver_log.csv and summary.json into config.output_dir.
RunSummary run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

struct ComparisonReport {
  std::vector<RunSummary> runs;
};

/// Runs every method in parallel, writes per-method artifacts into
/// output_dir/<label>/ plus comparison.csv and comparison.json.
ComparisonReport run_comparison(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace alslq
