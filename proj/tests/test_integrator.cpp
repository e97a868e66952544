#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "alslq/errors.hpp"
#include "alslq/integrator.hpp"

using namespace alslq;

namespace {

const IntegratorSettings kTight = IntegratorSettings::adaptive(1e-8, 1e-8);

}  // namespace

TEST(Integrator, ZeroFlowKeepsState) {
  const Flow zero = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(x.size()); };
  for (const auto& s : {kTight, IntegratorSettings::fixed(0.1)}) {
    const Trajectory tr = integrate_ode(zero, Eigen::VectorXd::Ones(1), TimeGrid({0.0, 0.3, 2.0}), s);
    for (const auto& v : tr.values()) EXPECT_EQ(v(0), 1.0);
  }
}

TEST(Integrator, ExponentialGrowth) {
  const Flow f = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return x; };
  const Trajectory tr = integrate_ode(f, Eigen::VectorXd::Ones(1), TimeGrid::uniform(0.0, 1.0, 5), kTight);
  EXPECT_NEAR(tr.back()(0), std::numbers::e, 1e-6);
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_NEAR(tr[i](0), std::exp(tr.time(i)), 1e-6);
}

TEST(Integrator, HarmonicOscillatorPreservesNorm) {
  const Flow f = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return Eigen::Vector2d(x(1), -x(0)); };
  const Trajectory tr =
      integrate_ode(f, Eigen::Vector2d(1.0, 0.0), TimeGrid::uniform(0.0, 2.0 * std::numbers::pi, 50), kTight);
  for (const auto& v : tr.values()) EXPECT_NEAR(v.norm(), 1.0, 1e-6);
  EXPECT_NEAR(tr.back()(0), 1.0, 1e-6);
}

TEST(Integrator, FixedRk4IsFourthOrder) {
  const Flow f = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return -x; };
  const TimeGrid g({0.0, 1.0});
  const double e1 = std::abs(integrate_ode(f, Eigen::VectorXd::Ones(1), g, IntegratorSettings::fixed(0.1)).back()(0) -
                             std::exp(-1.0));
  const double e2 = std::abs(integrate_ode(f, Eigen::VectorXd::Ones(1), g, IntegratorSettings::fixed(0.05)).back()(0) -
                             std::exp(-1.0));
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.1);
}

TEST(Integrator, LandsOnEveryNodeOfAnUnevenGrid) {
  const Flow f = [](const Eigen::VectorXd&, double t) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, std::cos(t)); };
  const TimeGrid g({0.0, 0.013, 0.5, 0.51, 2.0});
  const Trajectory tr = integrate_ode(f, Eigen::VectorXd::Zero(1), g, kTight);
  ASSERT_EQ(tr.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(tr.time(i), g[i]);
    EXPECT_NEAR(tr[i](0), std::sin(g[i]), 1e-8);
  }
}

TEST(Integrator, StepBudgetExhaustionThrows) {
  const Flow stiff = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return -1e7 * x; };
  IntegratorSettings s = IntegratorSettings::adaptive(1e-10, 1e-10, 50);
  EXPECT_THROW(integrate_ode(stiff, Eigen::VectorXd::Ones(1), TimeGrid({0.0, 1.0}), s), IntegrationError);
}

TEST(Integrator, NonFiniteStateThrows) {
  const Flow blowup = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return x.array().square(); };
  EXPECT_THROW(integrate_ode(blowup, Eigen::VectorXd::Ones(1), TimeGrid({0.0, 2.0}), IntegratorSettings::fixed(0.01)),
               IntegrationError);
}

TEST(Integrator, ProjectionRunsAfterSteps) {
  const Flow f = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return Eigen::VectorXd::Ones(x.size()); };
  const StepProjection clamp = [](Eigen::VectorXd& x) { x = x.cwiseMin(0.25); };
  const Trajectory tr = integrate_ode(f, Eigen::VectorXd::Zero(1), TimeGrid({0.0, 1.0}), kTight, nullptr, clamp);
  EXPECT_DOUBLE_EQ(tr.back()(0), 0.25);
}

TEST(IntegratorSettings, Validation) {
  EXPECT_THROW(IntegratorSettings::fixed(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(IntegratorSettings::adaptive(-1.0, 1e-6).validate(), std::invalid_argument);
  EXPECT_THROW(IntegratorSettings::adaptive(1e-8, 1e-6, 0).validate(), std::invalid_argument);
  EXPECT_NO_THROW(kTight.validate());
}
