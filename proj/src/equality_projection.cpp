#include "alslq/equality_projection.hpp"

#include <Eigen/SVD>

#include "alslq/errors.hpp"

namespace alslq {

ProjectionTerms projection_terms(const LinearizedEquality& eq) {
  const Eigen::Index ng = eq.D.rows();
  const Eigen::Index nu = eq.D.cols();
  ProjectionTerms terms;
  if (ng == 0) {
    terms.D_pinv = Eigen::MatrixXd::Zero(nu, 0);
    terms.projector = Eigen::MatrixXd::Identity(nu, nu);
    terms.null_basis = Eigen::MatrixXd::Identity(nu, nu);
    return terms;
  }
  if (ng > nu) {
    throw NumericalError("projection_terms: " + std::to_string(ng) + " equalities exceed " + std::to_string(nu) +
                         " inputs");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq.D, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double rank_tol = 1e-9 * sigma(0);
  if (!(sigma(ng - 1) > rank_tol)) {
    throw NumericalError("projection_terms: dg/du is rank deficient (sigma_min = " + std::to_string(sigma(ng - 1)) +
                         ")");
  }
  const Eigen::MatrixXd& U = svd.matrixU();
  const Eigen::MatrixXd& V = svd.matrixV();
  // D = U [S 0] V'  =>  D+ = V1 S^-1 U'.
  terms.D_pinv = V.leftCols(ng) * sigma.head(ng).cwiseInverse().asDiagonal() * U.transpose();
  terms.null_basis = V.rightCols(nu - ng);
  terms.projector = terms.null_basis * terms.null_basis.transpose();
  return terms;
}

ProjectedNode project_lq_subproblem(const LqNode& node, const LinearizedEquality& eq) {
  const int nx = node.state_dim();
  const int nu = node.input_dim();
  ProjectedNode out;
  if (eq.num_constraints() == 0) {
    out.node = node;
    out.reconstruction.feedback = Eigen::MatrixXd::Zero(nu, nx);
    out.reconstruction.feedforward = Eigen::VectorXd::Zero(nu);
    out.reconstruction.null_basis = Eigen::MatrixXd::Identity(nu, nu);
    return out;
  }
  if (eq.C.rows() != eq.e.size() || eq.D.rows() != eq.e.size() || eq.C.cols() != nx || eq.D.cols() != nu) {
    throw DimensionError("project_lq_subproblem: equality dimensions do not match the LQ node");
  }

  const ProjectionTerms terms = projection_terms(eq);
  const Eigen::MatrixXd F = -terms.D_pinv * eq.C;  // n_u x n_x
  const Eigen::VectorXd f = -terms.D_pinv * eq.e;  // n_u
  const Eigen::MatrixXd& Z = terms.null_basis;      // n_u x n_w

  // du = F dx + f + Z w substituted into the dynamics and the cost.
  const Eigen::MatrixXd RF = node.R * F;
  const Eigen::VectorXd Rf = node.R * f;
  LqNode& p = out.node;
  p.A = node.A + node.B * F;
  p.B = node.B * Z;
  p.d = node.d + node.B * f;
  p.Q = node.Q + F.transpose() * RF + node.P.transpose() * F + F.transpose() * node.P;
  p.Q = 0.5 * (p.Q + p.Q.transpose());
  p.R = Z.transpose() * node.R * Z;
  p.P = Z.transpose() * (RF + node.P);
  p.q = node.q + F.transpose() * Rf + node.P.transpose() * f + F.transpose() * node.r;
  p.r = Z.transpose() * (Rf + node.r);
  p.q0 = node.q0 + 0.5 * f.dot(Rf) + node.r.dot(f);

  out.reconstruction.feedback = F;
  out.reconstruction.feedforward = f;
  out.reconstruction.null_basis = Z;
  return out;
}

ProjectedLqApproximation project_lq_approximation(const LqApproximation& lq) {
  if (lq.equalities.size() != lq.nodes.size()) {
    throw DimensionError("project_lq_approximation: one linearized equality per node expected");
  }
  ProjectedLqApproximation out;
  out.lq.grid = lq.grid;
  out.lq.terminal = lq.terminal;
  out.lq.nodes.reserve(lq.nodes.size());
  out.reconstructions.reserve(lq.nodes.size());

  Eigen::MatrixXd previous_basis;
  for (std::size_t i = 0; i < lq.nodes.size(); ++i) {
    ProjectedNode projected = project_lq_subproblem(lq.nodes[i], lq.equalities[i]);
    Eigen::MatrixXd& Z = projected.reconstruction.null_basis;
    if (i > 0 && Z.cols() > 0 && Z.cols() == previous_basis.cols()) {
      // Rotate Z within its span to be closest to the previous basis.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z.transpose() * previous_basis, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
      Z = Z * rotation;
      projected.node.B = projected.node.B * rotation;
      projected.node.R = rotation.transpose() * projected.node.R * rotation;
      projected.node.P = rotation.transpose() * projected.node.P;
      projected.node.r = rotation.transpose() * projected.node.r;
    }
    previous_basis = Z;
    out.lq.nodes.push_back(std::move(projected.node));
    out.reconstructions.push_back(std::move(projected.reconstruction));
  }
  return out;
}

}  // namespace alslq
