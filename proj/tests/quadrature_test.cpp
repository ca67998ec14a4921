#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chronoscale/quadrature.hpp"
#include "oracles.hpp"

using chronoscale::integrate_adaptive;

TEST(Quadrature, Polynomials) {
  // Kronrod 15 is exact through degree 22 on a single panel.
  const auto r = integrate_adaptive([](double x) { return std::pow(x, 9) - 3 * x * x; }, -1, 2, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, (std::pow(2, 10) - 1) / 10.0 - (8 + 1), 1e-11);
}

TEST(Quadrature, Transcendental) {
  const auto r = integrate_adaptive([](double x) { return std::exp(x); }, 0, 1, 1e-12);
  EXPECT_NEAR(r.value, std::numbers::e - 1, 1e-13);
  const auto s = integrate_adaptive([](double x) { return std::sin(x); }, 0, std::numbers::pi, 1e-12);
  EXPECT_NEAR(s.value, 2.0, 1e-13);
}

TEST(Quadrature, SqrtEndpointSingularityRefines) {
  const auto r = integrate_adaptive([](double x) { return std::sqrt(x); }, 0, 1, 1e-10);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-9);
  EXPECT_GT(r.evaluations, 15u);
}

TEST(Quadrature, EmptyInterval) {
  const auto r = integrate_adaptive([](double) { return 1.0; }, 2, 2, 1e-9);
  EXPECT_EQ(r.value, 0.0);
}

TEST(Quadrature, PropertyMatchesSimpsonOnRandomSmoothIntegrands) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    const auto f = [=](double x) { return a * std::exp(b * x) + c * std::cos(3 * x); };
    const double lo = coef(rng);
    const double hi = lo + 0.5 + std::abs(coef(rng));
    const auto r = integrate_adaptive(f, lo, hi, 1e-11);
    EXPECT_LT(oracle::rel_err(r.value, oracle::simpson(f, lo, hi)), 1e-9);
  }
}
