#include "alslq/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "alslq/errors.hpp"

namespace alslq {

namespace {

void check_sizes(const Eigen::VectorXd& h, const Eigen::VectorXd& nu, const char* who) {
  if (h.size() != nu.size()) {
    throw DimensionError(std::string(who) + ": " + std::to_string(h.size()) + " constraints but " +
                         std::to_string(nu.size()) + " multipliers");
  }
}

PenaltyEvaluation make_eval(Eigen::Index n) {
  return PenaltyEvaluation{0.0, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

}  // namespace

void PenaltyStrategy::validate() const {
  switch (kind) {
    case Kind::kRelaxedBarrier:
      if (!(mu > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("relaxed barrier: mu and delta must be positive");
      }
      break;
    case Kind::kSmoothPhr:
      if (!(delta_psi > 0.0 && delta_psi < 1.0)) {
        throw std::invalid_argument("smooth PHR: delta_psi must lie in (0, 1)");
      }
      if (!(nu_min > 0.0)) throw std::invalid_argument("smooth PHR: nu_min must be positive");
      [[fallthrough]];
    case Kind::kPhr:
    case Kind::kNonSlack:
      if (!(rho > 0.0)) throw std::invalid_argument("augmented Lagrangian: rho must be positive");
      break;
  }
}

PenaltyEvaluation PenaltyStrategy::evaluate(const Eigen::VectorXd& h, const Eigen::VectorXd& nu) const {
  switch (kind) {
    case Kind::kPhr:
      return phr_penalty(h, nu, rho);
    case Kind::kNonSlack:
      return nonslack_penalty(h, nu, rho);
    case Kind::kSmoothPhr:
      return smooth_phr_penalty(h, nu, rho, delta_psi, nu_min);
    case Kind::kRelaxedBarrier:
      return relaxed_barrier_penalty(h, mu, delta);
  }
  throw std::logic_error("unknown penalty kind");
}

std::string_view to_string(PenaltyStrategy::Kind kind) {
  switch (kind) {
    case PenaltyStrategy::Kind::kPhr:
      return "phr";
    case PenaltyStrategy::Kind::kNonSlack:
      return "nonslack";
    case PenaltyStrategy::Kind::kSmoothPhr:
      return "smooth_phr";
    case PenaltyStrategy::Kind::kRelaxedBarrier:
      return "relaxed_barrier";
  }
  return "unknown";
}

PenaltyStrategy::Kind penalty_kind_from_string(std::string_view name) {
  if (name == "phr") return PenaltyStrategy::Kind::kPhr;
  if (name == "nonslack" || name == "non_slack") return PenaltyStrategy::Kind::kNonSlack;
  if (name == "smooth_phr") return PenaltyStrategy::Kind::kSmoothPhr;
  if (name == "relaxed_barrier") return PenaltyStrategy::Kind::kRelaxedBarrier;
  throw std::invalid_argument("unknown penalty '" + std::string(name) +
                              "' (expected phr, nonslack, smooth_phr or relaxed_barrier)");
}

PenaltyEvaluation phr_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& nu, double rho) {
  check_sizes(h, nu, "phr_penalty");
  PenaltyEvaluation out = make_eval(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double shifted = nu(i) - rho * h(i);
    const double active = std::max(0.0, shifted);
    out.value += (active * active - nu(i) * nu(i)) / (2.0 * rho);
    out.d_dh(i) = -active;
    // The kink shifted == 0 takes the active-branch curvature.
    out.d2_dh2(i) = shifted >= 0.0 ? rho : 0.0;
  }
  return out;
}

PenaltyEvaluation nonslack_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& nu, double rho) {
  check_sizes(h, nu, "nonslack_penalty");
  PenaltyEvaluation out = make_eval(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const bool active = h(i) <= 0.0 || nu(i) > 0.0;
    out.value += -nu(i) * h(i) + (active ? 0.5 * rho * h(i) * h(i) : 0.0);
    out.d_dh(i) = -nu(i) + (active ? rho * h(i) : 0.0);
    out.d2_dh2(i) = active ? rho : 0.0;
  }
  return out;
}

PsiValue psi_function(double t, double delta_psi) {
  const double t_star = delta_psi - 1.0;
  if (t >= t_star) {
    const double s = t + 1.0;
    return {-std::log(s), -1.0 / s, 1.0 / (s * s)};
  }
  // Taylor expansion of -ln(t + 1) at t_star, truncated after the quadratic term.
  const double a = 1.0 / (2.0 * delta_psi * delta_psi);
  const double b = -1.0 / delta_psi;
  const double c = -std::log(delta_psi);
  const double dt = t - t_star;
  return {a * dt * dt + b * dt + c, 2.0 * a * dt + b, 2.0 * a};
}

PenaltyEvaluation smooth_phr_penalty(const Eigen::VectorXd& h, const Eigen::VectorXd& nu, double rho,
                                     double delta_psi, double nu_min) {
  check_sizes(h, nu, "smooth_phr_penalty");
  PenaltyEvaluation out = make_eval(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(nu(i) >= nu_min)) {
      throw NumericalError("smooth_phr_penalty: multiplier " + std::to_string(nu(i)) + " below floor " +
                           std::to_string(nu_min));
    }
    const PsiValue psi = psi_function(rho * h(i) / nu(i), delta_psi);
    out.value += nu(i) * nu(i) / rho * psi.value;
    out.d_dh(i) = nu(i) * psi.d1;
    out.d2_dh2(i) = rho * psi.d2;
  }
  return out;
}

PenaltyEvaluation relaxed_barrier_penalty(const Eigen::VectorXd& h, double mu, double delta) {
  PenaltyEvaluation out = make_eval(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (h(i) > delta) {
      out.value += -mu * std::log(h(i));
      out.d_dh(i) = -mu / h(i);
      out.d2_dh2(i) = mu / (h(i) * h(i));
    } else {
      const double z = (h(i) - 2.0 * delta) / delta;
      out.value += 0.5 * mu * (z * z - 1.0) - mu * std::log(delta);
      out.d_dh(i) = mu * z / delta;
      out.d2_dh2(i) = mu / (delta * delta);
    }
  }
  return out;
}

PenaltyEvaluation equality_al_penalty(const Eigen::VectorXd& g, const Eigen::VectorXd& nu, double rho) {
  check_sizes(g, nu, "equality_al_penalty");
  PenaltyEvaluation out = make_eval(g.size());
  out.value = nu.dot(g) + 0.5 * rho * g.squaredNorm();
  out.d_dh = nu + rho * g;
  out.d2_dh2.setConstant(rho);
  return out;
}

void quadratize_constraint_term(const ConstraintJacobian& jac, const PenaltyEvaluation& eval, LqNode& node,
                                const std::vector<ConstraintHessian>* hessians, const QuadratizeOptions& options) {
  if (jac.dx.rows() != eval.d_dh.size() || jac.du.rows() != eval.d_dh.size()) {
    throw DimensionError("quadratize_constraint_term: Jacobian rows do not match the penalty evaluation");
  }
  const Eigen::MatrixXd weighted_dx = eval.d2_dh2.asDiagonal() * jac.dx;
  const Eigen::MatrixXd weighted_du = eval.d2_dh2.asDiagonal() * jac.du;
  node.q.noalias() += jac.dx.transpose() * eval.d_dh;
  node.r.noalias() += jac.du.transpose() * eval.d_dh;
  node.Q.noalias() += jac.dx.transpose() * weighted_dx;
  node.R.noalias() += jac.du.transpose() * weighted_du;
  node.P.noalias() += jac.du.transpose() * weighted_dx;

  if (!options.exact_hessian || hessians == nullptr || hessians->empty()) return;
  if (static_cast<Eigen::Index>(hessians->size()) != eval.d_dh.size()) {
    throw DimensionError("quadratize_constraint_term: one Hessian per constraint expected");
  }
  const Eigen::Index nx = node.Q.rows();
  const Eigen::Index nu = node.R.rows();
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
  for (std::size_t i = 0; i < hessians->size(); ++i) {
    const double w = eval.d_dh(static_cast<Eigen::Index>(i));
    const ConstraintHessian& hess = (*hessians)[i];
    joint.topLeftCorner(nx, nx) += w * hess.dxx;
    joint.bottomRightCorner(nu, nu) += w * hess.duu;
    joint.bottomLeftCorner(nu, nx) += w * hess.dux;
  }
  joint.topRightCorner(nx, nu) = joint.bottomLeftCorner(nu, nx).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(joint);
  const Eigen::MatrixXd clamped =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
  node.Q += clamped.topLeftCorner(nx, nx);
  node.R += clamped.bottomRightCorner(nu, nu);
  node.P += clamped.bottomLeftCorner(nu, nx);
}

}  // namespace alslq
