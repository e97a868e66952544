#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Core>

namespace alslq {

struct Linearization {
  Eigen::MatrixXd A;  // df/dx
  Eigen::MatrixXd B;  // df/du
};

/// Continuous-time system x' = f(x, u, t) with analytic Jacobians.
class SystemModel {
 public:
  using FlowFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;
  using JacobianFn = std::function<Linearization(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;

  SystemModel() = default;
  SystemModel(std::string name, int state_dim, int input_dim, FlowFn flow, JacobianFn jacobians);

  const std::string& name() const { return name_; }
  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }

  Eigen::VectorXd flow(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) const {
    return flow_(x, u, t);
  }
  Linearization jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) const {
    return jacobians_(x, u, t);
  }

 private:
  std::string name_;
  int state_dim_ = 0;
  int input_dim_ = 0;
  FlowFn flow_;
  JacobianFn jacobians_;
};

struct FiniteDifferenceReport {
  double max_relative_error = 0.0;
  int samples = 0;
  bool passed = true;
  Eigen::VectorXd worst_state;
  Eigen::VectorXd worst_input;
};

struct SamplingBox {
  Eigen::VectorXd state_lower, state_upper;
  Eigen::VectorXd input_lower, input_upper;
};

/// Compares analytic Jacobians against central differences at `samples`
/// points drawn uniformly from `box` (seeded). The relative error of an entry
/// is |analytic - fd| / max(1, |analytic|).
FiniteDifferenceReport finite_difference_check(const SystemModel& model, const SamplingBox& box, int samples,
                                               double tol, std::uint64_t seed = 0);

}  // namespace alslq
