#include "alslq/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace alslq {

SystemModel::SystemModel(std::string name, int state_dim, int input_dim, FlowFn flow, JacobianFn jacobians)
    : name_(std::move(name)),
      state_dim_(state_dim),
      input_dim_(input_dim),
      flow_(std::move(flow)),
      jacobians_(std::move(jacobians)) {
  if (state_dim_ <= 0 || input_dim_ < 0) throw std::invalid_argument("SystemModel: invalid dimensions");
  if (!flow_ || !jacobians_) throw std::invalid_argument("SystemModel: flow and jacobians required");
}

namespace {

Eigen::VectorXd sample_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd v(lo.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
  return v;
}

}  // namespace

FiniteDifferenceReport finite_difference_check(const SystemModel& model, const SamplingBox& box, int samples,
                                               double tol, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FiniteDifferenceReport report;
  report.samples = samples;
  const int nx = model.state_dim();
  const int nu = model.input_dim();

  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = sample_box(box.state_lower, box.state_upper, rng);
    const Eigen::VectorXd u = sample_box(box.input_lower, box.input_upper, rng);
    const double t = 0.0;
    const Linearization lin = model.jacobians(x, u, t);
    if (lin.A.rows() != nx || lin.A.cols() != nx || lin.B.rows() != nx || lin.B.cols() != nu) {
      report.passed = false;
      report.max_relative_error = std::numeric_limits<double>::infinity();
      return report;
    }

    auto track = [&](double analytic, double fd) {
      const double err = std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_state = x;
        report.worst_input = u;
      }
    };

    for (int j = 0; j < nx; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const Eigen::VectorXd col = (model.flow(xp, u, t) - model.flow(xm, u, t)) / (2.0 * h);
      for (int i = 0; i < nx; ++i) track(lin.A(i, j), col(i));
    }
    for (int j = 0; j < nu; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(u(j)));
      Eigen::VectorXd up = u, um = u;
      up(j) += h;
      um(j) -= h;
      const Eigen::VectorXd col = (model.flow(x, up, t) - model.flow(x, um, t)) / (2.0 * h);
      for (int i = 0; i < nx; ++i) track(lin.B(i, j), col(i));
    }
  }
  report.passed = report.max_relative_error <= tol;
  return report;
}

}  // namespace alslq
