#include "alslq/constraints.hpp"

#include <stdexcept>

namespace alslq {

ConstraintFunction concat(const ConstraintFunction& a, const ConstraintFunction& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  ConstraintFunction out;
  out.dim = a.dim + b.dim;
  out.value = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) {
    Eigen::VectorXd v(a.dim + b.dim);
    v << a.value(x, u, t), b.value(x, u, t);
    return v;
  };
  out.jacobian = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) {
    const ConstraintJacobian ja = a.jacobian(x, u, t);
    const ConstraintJacobian jb = b.jacobian(x, u, t);
    ConstraintJacobian j;
    j.dx.resize(ja.dx.rows() + jb.dx.rows(), ja.dx.cols());
    j.dx << ja.dx, jb.dx;
    j.du.resize(ja.du.rows() + jb.du.rows(), ja.du.cols());
    j.du << ja.du, jb.du;
    return j;
  };
  if (a.has_hessians() && b.has_hessians()) {
    out.hessians = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) {
      auto ha = a.hessians(x, u, t);
      auto hb = b.hessians(x, u, t);
      ha.insert(ha.end(), hb.begin(), hb.end());
      return ha;
    };
  }
  return out;
}

ConstraintSet combine(const ConstraintSet& a, const ConstraintSet& b) {
  ConstraintSet out;
  out.inequalities = concat(a.inequalities, b.inequalities);
  out.equalities = concat(a.equalities, b.equalities);
  out.state_equalities = concat(a.state_equalities, b.state_equalities);
  return out;
}

ConstraintSet box_input_constraints(const Eigen::VectorXd& u_max, int state_dim) {
  if ((u_max.array() <= 0.0).any()) throw std::invalid_argument("box_input_constraints: u_max must be > 0");
  const auto nu = static_cast<int>(u_max.size());
  ConstraintSet set;
  ConstraintFunction& h = set.inequalities;
  h.dim = 2 * nu;
  h.value = [u_max](const Eigen::VectorXd&, const Eigen::VectorXd& u, double) {
    Eigen::VectorXd v(2 * u_max.size());
    v << u_max - u, u + u_max;
    return v;
  };
  h.jacobian = [nu, state_dim](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
    ConstraintJacobian j;
    j.dx = Eigen::MatrixXd::Zero(2 * nu, state_dim);
    j.du.resize(2 * nu, nu);
    j.du << -Eigen::MatrixXd::Identity(nu, nu), Eigen::MatrixXd::Identity(nu, nu);
    return j;
  };
  h.hessians = [nu, state_dim](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
    const ConstraintHessian zero{Eigen::MatrixXd::Zero(state_dim, state_dim), Eigen::MatrixXd::Zero(nu, nu),
                                 Eigen::MatrixXd::Zero(nu, state_dim)};
    return std::vector<ConstraintHessian>(static_cast<std::size_t>(2 * nu), zero);
  };
  return set;
}

ConstraintSet obstacle_constraints(const std::vector<CircleObstacle>& obstacles, std::array<int, 2> position_index,
                                   int state_dim, int input_dim) {
  for (const auto& o : obstacles) {
    if (!(o.radius > 0.0) || !o.center.allFinite()) {
      throw std::invalid_argument("obstacle_constraints: obstacle radius must be positive and center finite");
    }
  }
  for (int idx : position_index) {
    if (idx < 0 || idx >= state_dim) throw std::invalid_argument("obstacle_constraints: position index out of range");
  }
  const auto n = static_cast<int>(obstacles.size());
  ConstraintSet set;
  if (n == 0) return set;
  ConstraintFunction& h = set.inequalities;
  h.dim = n;
  h.value = [obstacles, position_index](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) {
    const Eigen::Vector2d p(x(position_index[0]), x(position_index[1]));
    Eigen::VectorXd v(static_cast<Eigen::Index>(obstacles.size()));
    for (std::size_t j = 0; j < obstacles.size(); ++j) {
      v(static_cast<Eigen::Index>(j)) =
          (p - obstacles[j].center).squaredNorm() - obstacles[j].radius * obstacles[j].radius;
    }
    return v;
  };
  h.jacobian = [obstacles, position_index, state_dim, input_dim](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                                                                  double) {
    const Eigen::Vector2d p(x(position_index[0]), x(position_index[1]));
    ConstraintJacobian j;
    j.dx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(obstacles.size()), state_dim);
    j.du = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(obstacles.size()), input_dim);
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      const Eigen::Vector2d g = 2.0 * (p - obstacles[k].center);
      j.dx(static_cast<Eigen::Index>(k), position_index[0]) = g(0);
      j.dx(static_cast<Eigen::Index>(k), position_index[1]) = g(1);
    }
    return j;
  };
  h.hessians = [n, position_index, state_dim, input_dim](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
    ConstraintHessian hess{Eigen::MatrixXd::Zero(state_dim, state_dim), Eigen::MatrixXd::Zero(input_dim, input_dim),
                           Eigen::MatrixXd::Zero(input_dim, state_dim)};
    hess.dxx(position_index[0], position_index[0]) = 2.0;
    hess.dxx(position_index[1], position_index[1]) = 2.0;
    return std::vector<ConstraintHessian>(static_cast<std::size_t>(n), hess);
  };
  return set;
}

}  // namespace alslq
