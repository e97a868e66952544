#include "alslq/lq_approximation.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>

namespace alslq {

LqNode LqNode::zero(int state_dim, int input_dim) {
  LqNode n;
  n.A = Eigen::MatrixXd::Zero(state_dim, state_dim);
  n.B = Eigen::MatrixXd::Zero(state_dim, input_dim);
  n.d = Eigen::VectorXd::Zero(state_dim);
  n.Q = Eigen::MatrixXd::Zero(state_dim, state_dim);
  n.R = Eigen::MatrixXd::Zero(input_dim, input_dim);
  n.P = Eigen::MatrixXd::Zero(input_dim, state_dim);
  n.q = Eigen::VectorXd::Zero(state_dim);
  n.r = Eigen::VectorXd::Zero(input_dim);
  return n;
}

LqNode lerp(const LqNode& a, const LqNode& b, double w) {
  if (w == 0.0) return a;
  if (w == 1.0) return b;
  const double v = 1.0 - w;
  LqNode n;
  n.A = v * a.A + w * b.A;
  n.B = v * a.B + w * b.B;
  n.d = v * a.d + w * b.d;
  n.Q = v * a.Q + w * b.Q;
  n.R = v * a.R + w * b.R;
  n.P = v * a.P + w * b.P;
  n.q = v * a.q + w * b.q;
  n.r = v * a.r + w * b.r;
  n.q0 = v * a.q0 + w * b.q0;
  return n;
}

LqApproximation regularize(LqApproximation lq, double eps_min, double* max_shift) {
  double largest = 0.0;
  for (LqNode& node : lq.nodes) {
    if (node.R.size() == 0) continue;
    node.R = 0.5 * (node.R + node.R.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(node.R, Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues().minCoeff();
    if (lambda_min < eps_min) {
      const double shift = eps_min - lambda_min;
      node.R.diagonal().array() += shift;
      largest = std::max(largest, shift);
    }
  }
  if (max_shift != nullptr) *max_shift = largest;
  return lq;
}

double max_input_hessian_condition(const LqApproximation& lq) {
  double worst = 0.0;
  for (const LqNode& node : lq.nodes) {
    if (node.R.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(node.R, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    worst = std::max(worst, lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
  }
  return worst;
}

}  // namespace alslq
