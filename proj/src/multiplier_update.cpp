#include "alslq/multiplier_update.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "alslq/errors.hpp"

namespace alslq {

std::string_view to_string(DualRule rule) {
  switch (rule) {
    case DualRule::kPi1: return "pi1";
    case DualRule::kPi2: return "pi2";
    case DualRule::kPi3: return "pi3";
    case DualRule::kNone: return "none";
  }
  return "unknown";
}

DualRule dual_rule_from_string(std::string_view name) {
  if (name == "pi1") return DualRule::kPi1;
  if (name == "pi2") return DualRule::kPi2;
  if (name == "pi3") return DualRule::kPi3;
  if (name == "none") return DualRule::kNone;
  throw std::invalid_argument("unknown dual update rule '" + std::string(name) + "'");
}

DualUpdateConfig DualUpdateConfig::from(const PenaltyStrategy& strategy) {
  DualUpdateConfig cfg;
  cfg.alpha = strategy.alpha;
  cfg.rho = strategy.rho;
  cfg.nu_min = strategy.nu_min;
  cfg.delta_psi = strategy.delta_psi;
  switch (strategy.kind) {
    case PenaltyStrategy::Kind::kPhr: cfg.rule = DualRule::kPi1; break;
    case PenaltyStrategy::Kind::kNonSlack: cfg.rule = DualRule::kPi2; break;
    case PenaltyStrategy::Kind::kSmoothPhr: cfg.rule = DualRule::kPi3; break;
    case PenaltyStrategy::Kind::kRelaxedBarrier: cfg.rule = DualRule::kNone; break;
  }
  return cfg;
}

double update_pi1(double nu, double h, const DualUpdateConfig& cfg) {
  return std::max(nu - cfg.alpha * h, (1.0 - cfg.alpha / cfg.rho) * nu);
}

double update_pi2(double nu, double h, const DualUpdateConfig& cfg) { return std::max(0.0, nu - cfg.alpha * h); }

double update_pi3(double nu, double h, const DualUpdateConfig& cfg) {
  const double base = std::max(nu, cfg.nu_min);
  const PsiValue psi = psi_function(cfg.rho * h / base, cfg.delta_psi);
  return std::max(-cfg.alpha * base * psi.d1, cfg.nu_min);
}

namespace {

void require_match(const Trajectory& nu, const Trajectory& v, const char* what) {
  if (!(nu.grid() == v.grid())) throw DimensionError(std::string(what) + ": multiplier and constraint grids differ");
  if (nu.rows() != v.rows()) throw DimensionError(std::string(what) + ": multiplier and constraint sizes differ");
}

}  // namespace

Trajectory update_multiplier_trajectory(const Trajectory& nu, const Trajectory& h, const DualUpdateConfig& cfg) {
  require_match(nu, h, "update_multiplier_trajectory");
  if (cfg.rule == DualRule::kNone) return nu;
  Trajectory out = nu;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Eigen::VectorXd& v = out[i];
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      switch (cfg.rule) {
        case DualRule::kPi1: v[j] = update_pi1(v[j], h[i][j], cfg); break;
        case DualRule::kPi2: v[j] = update_pi2(v[j], h[i][j], cfg); break;
        case DualRule::kPi3: v[j] = update_pi3(v[j], h[i][j], cfg); break;
        case DualRule::kNone: break;
      }
    }
  }
  return out;
}

Trajectory update_equality_multipliers(const Trajectory& nu, const Trajectory& g, const DualUpdateConfig& cfg) {
  require_match(nu, g, "update_equality_multipliers");
  Trajectory out = nu;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += cfg.alpha * g[i];
  return out;
}

std::optional<std::string> check_stability(const DualUpdateConfig& cfg) {
  if (cfg.alpha > 0.0 && cfg.alpha < 2.0 * cfg.rho) return std::nullopt;
  std::ostringstream msg;
  msg << "dual step length alpha = " << cfg.alpha << " lies outside (0, 2 rho) = (0, " << 2.0 * cfg.rho
      << "); multiplier updates may not converge";
  return msg.str();
}

}  // namespace alslq
