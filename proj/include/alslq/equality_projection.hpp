#pragma once

#include <vector>

#include <Eigen/Core>

#include "alslq/lq_approximation.hpp"

namespace alslq {

// Any du satisfying the linearized equality is du = -D_pinv (C dx + e) + null_basis w.
struct ProjectionTerms {
  Eigen::MatrixXd D_pinv;      // n_u x n_g, D D_pinv = I
  Eigen::MatrixXd projector;   // N = I - D_pinv D (n_u x n_u), symmetric and idempotent
  Eigen::MatrixXd null_basis;  // n_u x (n_u - n_g), orthonormal columns spanning range(N)
};

/// Throws NumericalError when D is rank deficient (singular values below
/// 1e-9 * sigma_max).
ProjectionTerms projection_terms(const LinearizedEquality& eq);

/// du = feedback dx + feedforward + null_basis w.
struct InputReconstruction {
  Eigen::MatrixXd feedback;     // -D_pinv C
  Eigen::VectorXd feedforward;  // -D_pinv e
  Eigen::MatrixXd null_basis;

  Eigen::VectorXd operator()(const Eigen::VectorXd& dx, const Eigen::VectorXd& w) const {
    return feedback * dx + feedforward + null_basis * w;
  }
};

struct ProjectedNode {
  LqNode node;  // expressed in the free coordinates w
  InputReconstruction reconstruction;
};

/// Substitutes the constrained input parametrization into an LQ node so the
/// Riccati pass only optimizes the free directions. The affine drift of the
/// projected node collects B * feedforward.
ProjectedNode project_lq_subproblem(const LqNode& node, const LinearizedEquality& eq);

struct ProjectedLqApproximation {
  LqApproximation lq;  // input dimension n_u - n_g, no equalities attached
  std::vector<InputReconstruction> reconstructions;
};

/// Projects every node of `lq` using its attached equalities. Null-space bases
/// of neighbouring nodes are aligned (orthogonal Procrustes) so that the
/// projected data can be interpolated in time.
ProjectedLqApproximation project_lq_approximation(const LqApproximation& lq);

}  // namespace alslq
