#include "alslq/cost.hpp"

#include "alslq/errors.hpp"

namespace alslq {

CostFunction quadratic_tracking_cost(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, const Eigen::MatrixXd& Qf,
                                     const Eigen::VectorXd& x_ref, const Eigen::VectorXd& u_ref) {
  if (Q.rows() != x_ref.size() || Q.cols() != x_ref.size() || Qf.rows() != x_ref.size() ||
      Qf.cols() != x_ref.size() || R.rows() != u_ref.size() || R.cols() != u_ref.size()) {
    throw DimensionError("quadratic_tracking_cost: weight and reference sizes disagree");
  }
  CostFunction cost;
  cost.intermediate = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) {
    const Eigen::VectorXd ex = x - x_ref;
    const Eigen::VectorXd eu = u - u_ref;
    return 0.5 * ex.dot(Q * ex) + 0.5 * eu.dot(R * eu);
  };
  cost.intermediate_quadratic = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) {
    const Eigen::VectorXd ex = x - x_ref;
    const Eigen::VectorXd eu = u - u_ref;
    CostQuadratic c;
    c.dx = Q * ex;
    c.du = R * eu;
    c.value = 0.5 * ex.dot(c.dx) + 0.5 * eu.dot(c.du);
    c.dxx = Q;
    c.duu = R;
    c.dux = Eigen::MatrixXd::Zero(u_ref.size(), x_ref.size());
    return c;
  };
  cost.terminal = [=](const Eigen::VectorXd& x) {
    const Eigen::VectorXd ex = x - x_ref;
    return 0.5 * ex.dot(Qf * ex);
  };
  cost.terminal_quadratic = [=](const Eigen::VectorXd& x) {
    const Eigen::VectorXd ex = x - x_ref;
    TerminalQuadratic c;
    c.dx = Qf * ex;
    c.value = 0.5 * ex.dot(c.dx);
    c.dxx = Qf;
    return c;
  };
  return cost;
}

}  // namespace alslq
