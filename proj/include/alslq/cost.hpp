#pragma once

#include <functional>

#include <Eigen/Core>

namespace alslq {

struct CostQuadratic {
  double value = 0.0;
  Eigen::VectorXd dx, du;
  Eigen::MatrixXd dxx, duu, dux;  // dux is input x state
};

struct TerminalQuadratic {
  double value = 0.0;
  Eigen::VectorXd dx;
  Eigen::MatrixXd dxx;
};

/// Intermediate cost L(x, u, t) and terminal cost Phi(x) with analytic derivatives.
struct CostFunction {
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)> intermediate;
  std::function<CostQuadratic(const Eigen::VectorXd&, const Eigen::VectorXd&, double)> intermediate_quadratic;
  std::function<double(const Eigen::VectorXd&)> terminal;
  std::function<TerminalQuadratic(const Eigen::VectorXd&)> terminal_quadratic;
};

/// L = 1/2 (x - x_ref)'Q(x - x_ref) + 1/2 (u - u_ref)'R(u - u_ref),
/// Phi = 1/2 (x - x_ref)'Qf(x - x_ref).
CostFunction quadratic_tracking_cost(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, const Eigen::MatrixXd& Qf,
                                     const Eigen::VectorXd& x_ref, const Eigen::VectorXd& u_ref);

}  // namespace alslq
