#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "alslq/penalties.hpp"
#include "alslq/trajectory.hpp"

namespace alslq {

/// Pi1 pairs with PHR, Pi2 with NonSlack, Pi3 with SmoothPHR. kNone leaves
/// multipliers untouched (relaxed barrier).
enum class DualRule { kPi1, kPi2, kPi3, kNone };

std::string_view to_string(DualRule rule);
/// Accepts "pi1", "pi2", "pi3", "none".
DualRule dual_rule_from_string(std::string_view name);

struct DualUpdateConfig {
  double alpha = 1.0;
  double rho = 1.0;
  DualRule rule = DualRule::kPi1;
  double nu_min = 1e-6;
  double delta_psi = 0.5;

  /// Rule matching the strategy's penalty, with its alpha, rho, nu_min and delta_psi.
  static DualUpdateConfig from(const PenaltyStrategy& strategy);
};

/// nu <- max{nu - alpha h, (1 - alpha/rho) nu}
double update_pi1(double nu, double h, const DualUpdateConfig& cfg);
/// nu <- max{0, nu - alpha h}
double update_pi2(double nu, double h, const DualUpdateConfig& cfg);
/// nu <- max{-alpha nu psi'(rho h / nu), nu_min}
double update_pi3(double nu, double h, const DualUpdateConfig& cfg);

/// Applies cfg.rule at every node and component. Throws DimensionError when
/// the grids or dimensions disagree.
Trajectory update_multiplier_trajectory(const Trajectory& nu, const Trajectory& h, const DualUpdateConfig& cfg);

/// nu_eq <- nu_eq + alpha g for pure-state equality multipliers.
Trajectory update_equality_multipliers(const Trajectory& nu, const Trajectory& g, const DualUpdateConfig& cfg);

/// Empty when 0 < alpha < 2 rho; otherwise a human-readable warning.
std::optional<std::string> check_stability(const DualUpdateConfig& cfg);

}  // namespace alslq
