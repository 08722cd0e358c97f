#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include <Eigen/Core>

#include "qmem/ode.hpp"

using namespace qmem;

TEST(Dopri5, ExponentialDecay) {
  Eigen::VectorXd y(1);
  y << 1.0;
  const auto stats = integrate_dopri5([](double, const Eigen::VectorXd& v) { return Eigen::VectorXd(-2.0 * v); },
                                      y, 0.0, 3.0, AdaptiveOptions{});
  EXPECT_NEAR(y(0), std::exp(-6.0), 1e-10);
  EXPECT_GT(stats.accepted, 0u);
}

TEST(Dopri5, HarmonicOscillatorComplex) {
  Eigen::VectorXcd y(2);
  y << 1.0, 0.0;
  // dy/dt = -i sigma_x y: Rabi oscillation, y(t) = (cos t, -i sin t).
  auto rhs = [](double, const Eigen::VectorXcd& v) {
    Eigen::VectorXcd d(2);
    d << std::complex<double>(0, -1) * v(1), std::complex<double>(0, -1) * v(0);
    return d;
  };
  integrate_dopri5(rhs, y, 0.0, 10.0, AdaptiveOptions{});
  EXPECT_NEAR(std::abs(y(0) - std::cos(10.0)), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(y(1) - std::complex<double>(0, -std::sin(10.0))), 0.0, 1e-8);
}

TEST(Dopri5, TimeDependentRhs) {
  Eigen::VectorXd y(1);
  y << 0.0;
  integrate_dopri5([](double t, const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, std::cos(t)); }, y,
                   0.0, 2.0, AdaptiveOptions{});
  EXPECT_NEAR(y(0), std::sin(2.0), 1e-10);
}

TEST(Dopri5, ZeroSpanIsNoOp) {
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  const auto stats =
      integrate_dopri5([](double, const Eigen::VectorXd& v) { return Eigen::VectorXd(v); }, y, 1.0, 1.0, {});
  EXPECT_EQ(stats.rhs_evaluations, 0u);
  EXPECT_EQ(y, Eigen::VectorXd::Ones(3));
}

TEST(Dopri5, BackwardSpanRejected) {
  Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
  EXPECT_THROW(integrate_dopri5([](double, const Eigen::VectorXd& v) { return Eigen::VectorXd(v); }, y, 1.0, 0.0,
                                AdaptiveOptions{}),
               std::invalid_argument);
}

TEST(Dopri5, BlowUpReportsTimeReached) {
  // y' = y^2 from y(0) = 1 diverges at t = 1.
  Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
  try {
    integrate_dopri5([](double, const Eigen::VectorXd& v) { return Eigen::VectorXd(v.array().square()); }, y, 0.0,
                     2.0, AdaptiveOptions{});
    FAIL() << "expected an integration error";
  } catch (const IntegrationError& e) {
    EXPECT_NEAR(e.time_reached(), 1.0, 1e-3);
  }
}

TEST(Dopri5, StepBudget) {
  Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
  AdaptiveOptions opt;
  opt.max_steps = 5;
  EXPECT_THROW(integrate_dopri5([](double t, const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, std::cos(50 * t)); },
                                y, 0.0, 10.0, opt),
               IntegrationError);
}

TEST(Dopri5, OnAcceptCanProjectState) {
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  int calls = 0;
  integrate_dopri5(
      [](double, const Eigen::VectorXd& v) {
        Eigen::VectorXd d(2);
        d << -v(1), v(0);
        return d;
      },
      y, 0.0, 5.0, AdaptiveOptions{}, [&](double, Eigen::VectorXd& v) {
        ++calls;
        v.normalize();
        return true;
      });
  EXPECT_GT(calls, 0);
  EXPECT_NEAR(y.norm(), 1.0, 1e-15);
  EXPECT_NEAR(y(0), std::cos(5.0), 1e-8);
}
