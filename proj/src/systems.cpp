#include "alslq/systems.hpp"

#include <cmath>
#include <stdexcept>

namespace alslq {

void CartPoleParams::validate() const {
  if (!(cart_mass > 0.0) || !(pole_mass > 0.0) || !(pole_length > 0.0) || !(gravity > 0.0)) {
    throw std::invalid_argument("CartPoleParams: all parameters must be positive");
  }
}

SystemModel cartpole_model(const CartPoleParams& params) {
  params.validate();
  const double M = params.cart_mass;
  const double m = params.pole_mass;
  const double l = params.pole_length;
  const double g = params.gravity;

  auto flow = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) {
    const double s = std::sin(x(1));
    const double c = std::cos(x(1));
    const double w = x(3);
    const double D = M + m * s * s;
    Eigen::VectorXd dx(4);
    dx(0) = x(2);
    dx(1) = w;
    dx(2) = (u(0) + m * s * (l * w * w + g * c)) / D;
    dx(3) = (-u(0) * c - m * l * w * w * c * s - (M + m) * g * s) / (l * D);
    return dx;
  };

  auto jacobians = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) {
    const double s = std::sin(x(1));
    const double c = std::cos(x(1));
    const double w = x(3);
    const double D = M + m * s * s;
    const double dD = 2.0 * m * s * c;

    const double n1 = u(0) + m * l * w * w * s + m * g * s * c;
    const double n1_th = m * l * w * w * c + m * g * (c * c - s * s);
    const double n1_w = 2.0 * m * l * w * s;

    const double n2 = -u(0) * c - m * l * w * w * c * s - (M + m) * g * s;
    const double n2_th = u(0) * s - m * l * w * w * (c * c - s * s) - (M + m) * g * c;
    const double n2_w = -2.0 * m * l * w * c * s;

    Linearization lin{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 1)};
    lin.A(0, 2) = 1.0;
    lin.A(1, 3) = 1.0;
    lin.A(2, 1) = (n1_th * D - n1 * dD) / (D * D);
    lin.A(2, 3) = n1_w / D;
    lin.A(3, 1) = (n2_th * D - n2 * dD) / (l * D * D);
    lin.A(3, 3) = n2_w / (l * D);
    lin.B(2, 0) = 1.0 / D;
    lin.B(3, 0) = -c / (l * D);
    return lin;
  };

  return SystemModel("cartpole", 4, 1, flow, jacobians);
}

double cartpole_energy(const CartPoleParams& params, const Eigen::VectorXd& x) {
  const double M = params.cart_mass;
  const double m = params.pole_mass;
  const double l = params.pole_length;
  const double c = std::cos(x(1));
  return 0.5 * (M + m) * x(2) * x(2) + m * l * x(2) * x(3) * c + 0.5 * m * l * l * x(3) * x(3) -
         m * params.gravity * l * c;
}

SamplingBox cartpole_sampling_box() {
  SamplingBox box;
  box.state_lower = Eigen::Vector4d(-2.0, -2.0 * M_PI, -5.0, -10.0);
  box.state_upper = Eigen::Vector4d(2.0, 2.0 * M_PI, 5.0, 10.0);
  box.input_lower = Eigen::VectorXd::Constant(1, -20.0);
  box.input_upper = Eigen::VectorXd::Constant(1, 20.0);
  return box;
}

void PlanarMoverParams::validate() const {
  if (!(mass > 0.0) || damping < 0.0) {
    throw std::invalid_argument("PlanarMoverParams: mass must be positive and damping non-negative");
  }
  for (const auto& o : obstacles) {
    if (!(o.radius > 0.0) || !o.center.allFinite()) {
      throw std::invalid_argument("PlanarMoverParams: obstacle radius must be positive");
    }
  }
}

SystemModel planar_mover_model(const PlanarMoverParams& params) {
  params.validate();
  const double inv_m = 1.0 / params.mass;
  const double c = params.damping;

  Linearization lin{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 2)};
  lin.A(0, 2) = 1.0;
  lin.A(1, 3) = 1.0;
  lin.A(2, 2) = -c * inv_m;
  lin.A(3, 3) = -c * inv_m;
  lin.B(2, 0) = inv_m;
  lin.B(3, 1) = inv_m;

  auto flow = [lin](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) -> Eigen::VectorXd {
    return lin.A * x + lin.B * u;
  };
  auto jacobians = [lin](const Eigen::VectorXd&, const Eigen::VectorXd&, double) { return lin; };
  return SystemModel("planar_mover", 4, 2, flow, jacobians);
}

SamplingBox planar_mover_sampling_box() {
  SamplingBox box;
  box.state_lower = Eigen::Vector4d(-1.0, -2.0, -3.0, -3.0);
  box.state_upper = Eigen::Vector4d(6.0, 2.0, 3.0, 3.0);
  box.input_lower = Eigen::Vector2d(-10.0, -10.0);
  box.input_upper = Eigen::Vector2d(10.0, 10.0);
  return box;
}

PlanarMoverParams default_maze() {
  PlanarMoverParams params;
  params.mass = 1.0;
  params.damping = 0.5;
  params.goal = Eigen::Vector2d(4.5, 0.0);
  for (int i = 0; i < 9; ++i) {
    params.obstacles.push_back({Eigen::Vector2d(0.5 + 0.5 * i, 0.6), 0.15});
    params.obstacles.push_back({Eigen::Vector2d(0.75 + 0.5 * i, -0.6), 0.15});
  }
  // Gate pillars: free gap |y| < 0.1 at x = 2.5.
  params.obstacles.push_back({Eigen::Vector2d(2.5, 0.3), 0.2});
  params.obstacles.push_back({Eigen::Vector2d(2.5, -0.3), 0.2});
  return params;
}

SystemModel double_integrator_model() {
  Linearization lin{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1)};
  lin.A(0, 1) = 1.0;
  lin.B(1, 0) = 1.0;
  auto flow = [lin](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) -> Eigen::VectorXd {
    return lin.A * x + lin.B * u;
  };
  auto jacobians = [lin](const Eigen::VectorXd&, const Eigen::VectorXd&, double) { return lin; };
  return SystemModel("double_integrator", 2, 1, flow, jacobians);
}

SystemModel equality_toy_model() {
  auto flow = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) -> Eigen::VectorXd {
    Eigen::VectorXd dx(2);
    dx(0) = x(1);
    dx(1) = -std::sin(x(0)) - 0.1 * x(1) + u(0) - 0.5 * u(1);
    return dx;
  };
  auto jacobians = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) {
    Linearization lin{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    lin.A(0, 1) = 1.0;
    lin.A(1, 0) = -std::cos(x(0));
    lin.A(1, 1) = -0.1;
    lin.B(1, 0) = 1.0;
    lin.B(1, 1) = -0.5;
    return lin;
  };
  return SystemModel("equality_toy", 2, 2, flow, jacobians);
}

ConstraintSet equality_toy_constraints() {
  ConstraintSet set;
  set.equalities.dim = 1;
  set.equalities.value = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double) {
    return Eigen::VectorXd::Constant(1, u(0) + u(1));
  };
  set.equalities.jacobian = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
    return ConstraintJacobian{Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Ones(1, 2)};
  };
  return set;
}

}  // namespace alslq
