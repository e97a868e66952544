#include "alslq/riccati.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Cholesky>

#include "alslq/errors.hpp"

namespace alslq {

namespace {

// Riccati state layout: [vec(S) column-major; s].
Eigen::VectorXd pack(const Eigen::MatrixXd& S, const Eigen::VectorXd& s) {
  const Eigen::Index n = S.rows();
  Eigen::VectorXd y(n * n + n);
  y.head(n * n) = Eigen::Map<const Eigen::VectorXd>(S.data(), n * n);
  y.tail(n) = s;
  return y;
}

LqNode node_at(const LqApproximation& lq, double t) {
  const std::size_t i = lq.grid.interval(t);
  const double w = std::clamp((t - lq.grid[i]) / (lq.grid[i + 1] - lq.grid[i]), 0.0, 1.0);
  return lerp(lq.nodes[i], lq.nodes[i + 1], w);
}

}  // namespace

RiccatiResult backward_riccati(const LqApproximation& lq, const RiccatiSettings& settings) {
  if (lq.nodes.size() != lq.grid.size()) {
    throw DimensionError("backward_riccati: " + std::to_string(lq.nodes.size()) + " LQ nodes for " +
                         std::to_string(lq.grid.size()) + " grid nodes");
  }
  const int nx = lq.state_dim();
  const int nu = lq.input_dim();
  const double tf = lq.grid.tf();

  // Integrate in reversed time tau = tf - t.
  std::vector<double> tau_nodes(lq.grid.size());
  for (std::size_t i = 0; i < tau_nodes.size(); ++i) tau_nodes[i] = tf - lq.grid[lq.grid.size() - 1 - i];
  tau_nodes.front() = 0.0;
  const TimeGrid tau_grid(std::move(tau_nodes));

  const Flow flow = [&](const Eigen::VectorXd& y, double tau) -> Eigen::VectorXd {
    const LqNode n = node_at(lq, tf - tau);
    const Eigen::Map<const Eigen::MatrixXd> S(y.data(), nx, nx);
    const auto s = y.tail(nx);
    Eigen::MatrixXd dS = n.Q + n.A.transpose() * S + S * n.A;
    Eigen::VectorXd ds = n.q + n.A.transpose() * s + S * n.d;
    if (nu > 0) {
      const Eigen::MatrixXd G = n.B.transpose() * S + n.P;  // nu x nx
      const Eigen::VectorXd g = n.B.transpose() * s + n.r;
      const Eigen::LLT<Eigen::MatrixXd> llt(n.R);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("backward_riccati: R is not positive definite at t = " + std::to_string(tf - tau));
      }
      dS.noalias() -= G.transpose() * llt.solve(G);
      ds.noalias() -= G.transpose() * llt.solve(g);
    }
    return pack(dS, ds);
  };

  const double cap = settings.norm_cap;
  const StepProjection symmetrize = [nx, cap](Eigen::VectorXd& y) {
    Eigen::Map<Eigen::MatrixXd> S(y.data(), nx, nx);
    const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
    S = sym;
    if (!(S.cwiseAbs().maxCoeff() <= cap)) {
      throw IntegrationError("backward_riccati: S exceeded the norm cap " + std::to_string(cap));
    }
  };

  const Eigen::MatrixXd Qf = 0.5 * (lq.terminal.Qf + lq.terminal.Qf.transpose());
  RiccatiResult result;
  const Trajectory reversed =
      integrate_ode(flow, pack(Qf, lq.terminal.qf), tau_grid, settings.integrator, &result.stats, symmetrize);

  const std::size_t N = lq.grid.size();
  std::vector<Eigen::MatrixXd> S_nodes(N), K_nodes(N);
  std::vector<Eigen::VectorXd> s_nodes(N), uff_nodes(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Eigen::VectorXd& y = reversed[N - 1 - i];
    Eigen::MatrixXd S = Eigen::Map<const Eigen::MatrixXd>(y.data(), nx, nx);
    if (i == N - 1) S = Qf;
    const Eigen::VectorXd s = y.tail(nx);
    const LqNode& n = lq.nodes[i];
    if (nu > 0) {
      const Eigen::LLT<Eigen::MatrixXd> llt(n.R);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("backward_riccati: R is not positive definite at node " + std::to_string(i));
      }
      K_nodes[i] = -llt.solve(n.B.transpose() * S + n.P);
      uff_nodes[i] = -llt.solve(n.B.transpose() * s + n.r);
    } else {
      K_nodes[i] = Eigen::MatrixXd::Zero(0, nx);
      uff_nodes[i] = Eigen::VectorXd::Zero(0);
    }
    S_nodes[i] = std::move(S);
    s_nodes[i] = s;
  }
  s_nodes.back() = lq.terminal.qf;
  result.solution.S = MatrixTrajectory(lq.grid, std::move(S_nodes));
  result.solution.s = Trajectory(lq.grid, std::move(s_nodes));
  result.K = MatrixTrajectory(lq.grid, std::move(K_nodes));
  result.u_ff = Trajectory(lq.grid, std::move(uff_nodes));
  return result;
}

}  // namespace alslq
