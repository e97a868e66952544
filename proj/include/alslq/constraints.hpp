#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace alslq {

struct ConstraintJacobian {
  Eigen::MatrixXd dx;  // rows = constraint dim, cols = state dim
  Eigen::MatrixXd du;  // rows = constraint dim, cols = input dim
};

// Second derivatives of one scalar constraint component.
struct ConstraintHessian {
  Eigen::MatrixXd dxx;
  Eigen::MatrixXd duu;
  Eigen::MatrixXd dux;  // input x state
};

/// Vector-valued c(x, u, t) with analytic first and (optionally) second derivatives.
struct ConstraintFunction {
  using ValueFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;
  using JacobianFn = std::function<ConstraintJacobian(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;
  using HessianFn =
      std::function<std::vector<ConstraintHessian>(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;

  int dim = 0;
  ValueFn value;
  JacobianFn jacobian;
  HessianFn hessians;  // may be empty

  bool empty() const { return dim == 0; }
  bool has_hessians() const { return static_cast<bool>(hessians); }
};

/// Stacks `b` below `a`. Hessians are kept only if both sides provide them.
ConstraintFunction concat(const ConstraintFunction& a, const ConstraintFunction& b);

/// All path constraints of an optimal control problem.
struct ConstraintSet {
  // h(x, u, t) >= 0 is feasible. Handled by a PenaltyStrategy.
  ConstraintFunction inequalities;
  // g(x, u, t) = 0 with dg/du of full row rank. Enforced by null-space projection.
  ConstraintFunction equalities;
  // Pure-state equalities g(x, t) = 0. Handled with a quadratic augmented Lagrangian.
  ConstraintFunction state_equalities;

  int num_inequalities() const { return inequalities.dim; }
  int num_equalities() const { return equalities.dim; }
  int num_state_equalities() const { return state_equalities.dim; }
};

/// Component-wise union of two constraint sets.
ConstraintSet combine(const ConstraintSet& a, const ConstraintSet& b);

/// -u_max <= u <= u_max as h = [u_max - u; u + u_max].
ConstraintSet box_input_constraints(const Eigen::VectorXd& u_max, int state_dim);

struct CircleObstacle {
  Eigen::Vector2d center;
  double radius = 0.0;
};

/// One state-only inequality per obstacle, h_j = |p(x) - c_j|^2 - r_j^2, where
/// p(x) = (x[position_index[0]], x[position_index[1]]).
ConstraintSet obstacle_constraints(const std::vector<CircleObstacle>& obstacles, std::array<int, 2> position_index,
                                   int state_dim, int input_dim);

}  // namespace alslq
