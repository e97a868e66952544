#pragma once

#include <vector>

#include <Eigen/Core>

#include "alslq/trajectory.hpp"

namespace alslq {

/// Linear dynamics dx' = A dx + B du + d and quadratic cost
/// 1/2 dx'Q dx + 1/2 du'R du + du'P dx + q'dx + r'du + q0 around a nominal point.
struct LqNode {
  Eigen::MatrixXd A, B;
  Eigen::VectorXd d;
  Eigen::MatrixXd Q, R, P;
  Eigen::VectorXd q, r;
  double q0 = 0.0;

  static LqNode zero(int state_dim, int input_dim);
  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Linearization C dx + D du + e = 0 of a state-input equality g(x, u, t) = 0.
struct LinearizedEquality {
  Eigen::MatrixXd C;  // dg/dx
  Eigen::MatrixXd D;  // dg/du
  Eigen::VectorXd e;  // g at the nominal point

  int num_constraints() const { return static_cast<int>(e.size()); }
};

struct LqTerminal {
  Eigen::MatrixXd Qf;
  Eigen::VectorXd qf;
  double qf0 = 0.0;
};

struct LqApproximation {
  TimeGrid grid;
  std::vector<LqNode> nodes;
  LqTerminal terminal;
  // One entry per node when state-input equalities are present, empty otherwise.
  std::vector<LinearizedEquality> equalities;

  int state_dim() const { return nodes.empty() ? 0 : nodes.front().state_dim(); }
  int input_dim() const { return nodes.empty() ? 0 : nodes.front().input_dim(); }
};

/// Linear blend (1 - w) a + w b of every field.
LqNode lerp(const LqNode& a, const LqNode& b, double w);

/// Shifts every R(t) by a multiple of the identity so that its smallest
/// eigenvalue is at least eps_min. `max_shift` receives the largest shift applied.
LqApproximation regularize(LqApproximation lq, double eps_min, double* max_shift = nullptr);

/// Largest condition number of R(t) over the nodes.
double max_input_hessian_condition(const LqApproximation& lq);

}  // namespace alslq
