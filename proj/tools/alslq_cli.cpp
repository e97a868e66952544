// Experiment runner: `alslq_cli run <config>` or `alslq_cli compare <config>`.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "alslq/experiment.hpp"

namespace {

nlohmann::ordered_json read_document(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw alslq::ConfigError(path, "cannot open config file");
  try {
    return nlohmann::ordered_json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw alslq::ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmented-Lagrangian SLQ-MPC experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  for (const char* name : {"run", "compare"}) {
    CLI::App* sub = app.add_subcommand(name, std::string(name) == "run" ? "Run one method on a task"
                                                                         : "Run two or more methods on the same task");
    sub->add_option("config", config_path, "JSON experiment config")->required();
    sub->add_option("--output-dir", output_dir, "Override output_dir");
    sub->add_option("--seed", seed, "Override seed");
    sub->add_flag("--quiet", quiet, "Only report errors");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : alslq::kExitConfigError;
  }
  const bool comparison = app.got_subcommand("compare");

  alslq::ExperimentConfig config;
  try {
    nlohmann::ordered_json doc = read_document(config_path);
    if (doc.is_object()) {
      if (output_dir) doc["output_dir"] = *output_dir;
      if (seed) doc["seed"] = *seed;
    }
    config = alslq::parse_config(doc, comparison);
  } catch (const alslq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    if (comparison && e.path() == "methods") {
      std::cerr << "usage: alslq_cli compare <config>  (config lists two or more entries under \"methods\")\n";
    }
    return alslq::kExitConfigError;
  }

  // Stability warnings go to stderr even with --quiet; the run proceeds.
  for (const auto& m : config.methods) {
    if (m.dual.rule == alslq::DualRule::kNone) continue;
    if (const auto warning = alslq::check_stability(m.dual)) std::cerr << "warning: " << m.label << ": " << *warning << "\n";
  }

  std::ostream* log = quiet ? nullptr : &std::cout;
  try {
    if (!comparison) {
      const alslq::RunSummary s = alslq::run_experiment(config, log);
      if (s.exit_code != alslq::kExitSuccess) {
        std::cerr << "run failed: " << s.reason;
        if (s.crashed) std::cerr << " (" << s.error << ")";
        else if (s.result.aborted) std::cerr << " (" << s.result.abort_reason << ")";
        std::cerr << "\n";
      }
      return s.exit_code;
    }
    const alslq::ComparisonReport report = alslq::run_comparison(config, log);
    for (const auto& s : report.runs) {
      if (s.exit_code != alslq::kExitSuccess && !quiet) std::cout << s.label << " flagged: " << s.reason << "\n";
    }
    return alslq::kExitSuccess;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return alslq::kExitSolverAbort;
  }
}
