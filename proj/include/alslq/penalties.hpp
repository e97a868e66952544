#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "alslq/constraints.hpp"
#include "alslq/lq_approximation.hpp"

namespace alslq {

/// Value and separable derivatives of a penalty P(h) summed over constraints.
struct PenaltyEvaluation {
  double value = 0.0;
  Eigen::VectorXd d_dh;    // dP/dh_i
  Eigen::VectorXd d2_dh2;  // d2P/dh_i^2
};

struct PenaltyStrategy {
  enum class Kind { kPhr, kNonSlack, kSmoothPhr, kRelaxedBarrier };

  Kind kind = Kind::kPhr;
  double rho = 1.0;         // penalty weight
  double alpha = 1.0;       // dual ascent step length
  double mu = 0.1;          // barrier weight (relaxed barrier)
  double delta = 0.1;       // barrier relaxation threshold
  double delta_psi = 0.5;   // relaxation point of psi, in (0, 1)
  double nu_min = 1e-6;     // multiplier floor (smooth PHR)

  bool uses_multipliers() const { return kind != Kind::kRelaxedBarrier; }
  /// Starting multiplier value for each inequality.
  double initial_multiplier() const { return kind == Kind::kSmoothPhr ? nu_min : 0.0; }

  /// Throws std::invalid_argument on out-of-range parameters. The dual step
  /// length is not checked here; see check_stability().
  void validate() const;

  PenaltyEvaluation evaluate(const Eigen::VectorXd& h, const Eigen::VectorXd& nu) const;
};

std::string_view to_string(PenaltyStrategy::Kind kind);
/// Accepts "phr", "nonslack", "smooth_phr", "relaxed_barrier".
PenaltyStrategy::Kind penalty_kind_from_string(std::string_view name);

PenaltyEvaluation phr_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& nu, double rho);
PenaltyEvaluation nonslack_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& nu, double rho);
/// Throws NumericalError if some nu_i < nu_min.
PenaltyEvaluation smooth_phr_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& nu, double rho,
                                     double delta_psi, double nu_min = 1e-6);
PenaltyEvaluation relaxed_barrier_penalty(const Eigen::VectorXd& h, double mu, double delta);
/// sum nu_i g_i + rho/2 g_i^2.
PenaltyEvaluation equality_al_penalty(const Eigen::VectorXd& g, const Eigen::VectorXd& nu, double rho);

struct PsiValue {
  double value;
  double d1;
  double d2;
};

/// psi(t) = -ln(t + 1) for t >= delta_psi - 1, continued below by the
/// quadratic that matches value, slope and curvature at the junction.
PsiValue psi_function(double t, double delta_psi);

struct QuadratizeOptions {
  // Adds sum_i P'(h_i) * Hessian(h_i), clamped to PSD, when the constraint
  // provides second derivatives.
  bool exact_hessian = false;
};

/// Adds the Gauss-Newton expansion of P(h(x, u)) to the LQ node:
/// q += Hx' P', r += Hu' P', Q += Hx' diag(P'') Hx, R += Hu' diag(P'') Hu,
/// P += Hu' diag(P'') Hx.
void quadratize_constraint_term(const ConstraintJacobian& jac, const PenaltyEvaluation& eval, LqNode& node,
                                const std::vector<ConstraintHessian>* hessians = nullptr,
                                const QuadratizeOptions& options = {});

}  // namespace alslq
