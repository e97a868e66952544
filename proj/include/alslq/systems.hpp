#pragma once

#include <vector>

#include <Eigen/Core>

#include "alslq/constraints.hpp"
#include "alslq/system_model.hpp"

namespace alslq {

// Point-mass pendulum on a cart. State (p, theta, p_dot, theta_dot) with
// theta = 0 hanging down and theta = pi upright; input is the horizontal cart force.
struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.3;
  double pole_length = 0.5;
  double gravity = 9.81;

  void validate() const;
};

SystemModel cartpole_model(const CartPoleParams& params);

/// Total mechanical energy; conserved under u = 0.
double cartpole_energy(const CartPoleParams& params, const Eigen::VectorXd& x);

/// State/input box used to verify the cart-pole Jacobians.
SamplingBox cartpole_sampling_box();

// Force-controlled planar point mass with linear damping. State (px, py, vx, vy),
// input (Fx, Fy).
struct PlanarMoverParams {
  double mass = 1.0;
  double damping = 0.5;
  std::vector<CircleObstacle> obstacles;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();

  void validate() const;
};

SystemModel planar_mover_model(const PlanarMoverParams& params);

SamplingBox planar_mover_sampling_box();

/// Default maze: two staggered rows of nine pillars lining the path plus a
/// pair of gate pillars leaving one narrow gap (20 pillars in total).
PlanarMoverParams default_maze();

/// Double integrator p' = v, v' = u.
SystemModel double_integrator_model();

// Damped pendulum driven by two inputs: q'' = -sin(q) - 0.1 q' + u1 - 0.5 u2.
SystemModel equality_toy_model();

/// The single state-input equality u1 + u2 = 0 of the toy.
ConstraintSet equality_toy_constraints();

}  // namespace alslq
