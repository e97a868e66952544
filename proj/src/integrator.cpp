#include "alslq/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace alslq {

IntegratorSettings IntegratorSettings::fixed(double step) {
  IntegratorSettings s;
  s.mode = Mode::kFixedRk4;
  s.step = step;
  return s;
}

IntegratorSettings IntegratorSettings::adaptive(double abs_tol, double rel_tol, std::size_t max_steps) {
  IntegratorSettings s;
  s.mode = Mode::kAdaptiveRk45;
  s.abs_tol = abs_tol;
  s.rel_tol = rel_tol;
  s.max_steps = max_steps;
  return s;
}

void IntegratorSettings::validate() const {
  if (max_steps < 1) throw std::invalid_argument("IntegratorSettings: max_steps must be >= 1");
  if (mode == Mode::kFixedRk4) {
    if (!(step > 0.0)) throw std::invalid_argument("IntegratorSettings: step must be > 0");
  } else if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw std::invalid_argument("IntegratorSettings: tolerances must be > 0");
  }
}

namespace {

using Eigen::VectorXd;

class Rk4Stepper {
 public:
  Rk4Stepper(const Flow& flow, IntegrationStats& stats) : flow_(flow), stats_(stats) {}

  VectorXd step(const VectorXd& x, double t, double h) {
    const VectorXd k1 = flow_(x, t);
    const VectorXd k2 = flow_(x + 0.5 * h * k1, t + 0.5 * h);
    const VectorXd k3 = flow_(x + 0.5 * h * k2, t + 0.5 * h);
    const VectorXd k4 = flow_(x + h * k3, t + h);
    stats_.flow_evaluations += 4;
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  const Flow& flow_;
  IntegrationStats& stats_;
};

// Dormand-Prince 5(4) with FSAL and a PI step-size controller.
class DormandPrince {
 public:
  DormandPrince(const Flow& flow, const IntegratorSettings& settings, IntegrationStats& stats)
      : flow_(flow), settings_(settings), stats_(stats) {}

  // Advances x from t to t_end, landing exactly on t_end.
  void advance(VectorXd& x, double& t, double t_end, std::size_t& attempts, const StepProjection& projection) {
    if (!have_k1_) {
      k1_ = eval(x, t);
      have_k1_ = true;
      if (h_ <= 0.0) h_ = initial_step(x, t, t_end - t);
    }
    while (t < t_end) {
      if (++attempts > settings_.max_steps) {
        throw IntegrationError("integrate_ode: step budget of " + std::to_string(settings_.max_steps) +
                               " exhausted at t = " + std::to_string(t));
      }
      const double remaining = t_end - t;
      const bool last = h_ >= remaining * (1.0 - 1e-12);
      const double h = last ? remaining : h_;

      const VectorXd k2 = eval(x + h * (a21 * k1_), t + c2 * h);
      const VectorXd k3 = eval(x + h * (a31 * k1_ + a32 * k2), t + c3 * h);
      const VectorXd k4 = eval(x + h * (a41 * k1_ + a42 * k2 + a43 * k3), t + c4 * h);
      const VectorXd k5 = eval(x + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * h);
      const VectorXd k6 = eval(x + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
      VectorXd x_new = x + h * (b1 * k1_ + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const VectorXd k7 = eval(x_new, t + h);
      const VectorXd err_vec = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double err = 0.0;
      bool finite = x_new.allFinite() && err_vec.allFinite();
      if (finite) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const double scale =
              settings_.abs_tol + settings_.rel_tol * std::max(std::abs(x(i)), std::abs(x_new(i)));
          err = std::max(err, std::abs(err_vec(i)) / scale);
        }
      }

      if (finite && err <= 1.0) {
        ++stats_.accepted_steps;
        t = last ? t_end : t + h;
        x = std::move(x_new);
        if (projection) {
          projection(x);
          k1_ = eval(x, t);
        } else {
          k1_ = k7;
        }
        const double fac11 = std::pow(std::max(err, 1e-10), kExpo1);
        double fac = fac11 / std::pow(err_old_, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
        const double h_next = h / fac;
        // A shortened final step says nothing about the natural step size.
        h_ = last ? std::max(h_, h_next) : h_next;
        err_old_ = std::max(err, 1e-4);
      } else {
        ++stats_.rejected_steps;
        const double shrink = finite ? std::min(1.0 / kFacMin, std::pow(err, kExpo1) / kSafe) : 10.0;
        h_ = h / shrink;
        if (h_ < 1e-14 * std::max(1.0, std::abs(t))) {
          throw IntegrationError(finite ? "integrate_ode: step size underflow at t = " + std::to_string(t)
                                        : "integrate_ode: non-finite state at t = " + std::to_string(t));
        }
      }
    }
  }

 private:
  VectorXd eval(const VectorXd& x, double t) {
    ++stats_.flow_evaluations;
    return flow_(x, t);
  }

  double initial_step(const VectorXd& x, double t, double span) {
    const VectorXd scale = (settings_.abs_tol + settings_.rel_tol * x.array().abs()).matrix();
    const double d0 = (x.array() / scale.array()).matrix().norm();
    const double d1 = (k1_.array() / scale.array()).matrix().norm();
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const VectorXd k = eval(x + h0 * k1_, t + h0);
    const double d2 = ((k - k1_).array() / scale.array()).matrix().norm() / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double kBeta = 0.04;
  static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  static constexpr double kSafe = 0.9;
  static constexpr double kFacMin = 0.2;
  static constexpr double kFacMax = 10.0;

  const Flow& flow_;
  const IntegratorSettings& settings_;
  IntegrationStats& stats_;
  VectorXd k1_;
  bool have_k1_ = false;
  double h_ = 0.0;
  double err_old_ = 1e-4;
};

}  // namespace

Trajectory integrate_ode(const Flow& flow, const Eigen::VectorXd& x0, const TimeGrid& grid,
                         const IntegratorSettings& settings, IntegrationStats* stats,
                         const StepProjection& projection) {
  settings.validate();
  if (grid.empty()) throw std::invalid_argument("integrate_ode: empty grid");
  if (!x0.allFinite()) throw IntegrationError("integrate_ode: non-finite initial state");

  IntegrationStats local_stats;
  IntegrationStats& st = stats != nullptr ? *stats : local_stats;

  std::vector<Eigen::VectorXd> values;
  values.reserve(grid.size());
  Eigen::VectorXd x = x0;
  values.push_back(x);
  double t = grid.t0();
  std::size_t attempts = 0;

  if (settings.mode == IntegratorSettings::Mode::kFixedRk4) {
    Rk4Stepper rk4(flow, st);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double span = grid[i] - grid[i - 1];
      const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / settings.step - 1e-9)));
      const double h = span / static_cast<double>(n);
      for (std::size_t k = 0; k < n; ++k) {
        if (++attempts > settings.max_steps) {
          throw IntegrationError("integrate_ode: step budget of " + std::to_string(settings.max_steps) +
                                 " exhausted at t = " + std::to_string(t));
        }
        x = rk4.step(x, t, h);
        t = grid[i - 1] + h * static_cast<double>(k + 1);
        if (!x.allFinite()) throw IntegrationError("integrate_ode: non-finite state at t = " + std::to_string(t));
        if (projection) projection(x);
        ++st.accepted_steps;
      }
      t = grid[i];
      values.push_back(x);
    }
  } else {
    DormandPrince dopri(flow, settings, st);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      dopri.advance(x, t, grid[i], attempts, projection);
      values.push_back(x);
    }
  }
  return Trajectory(grid, std::move(values));
}

}  // namespace alslq
