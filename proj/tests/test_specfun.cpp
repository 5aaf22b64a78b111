#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <gtest/gtest.h>

#include "ehrelay/specfun.hpp"
#include "oracles.hpp"

namespace ehrelay {
namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> xs;
  for (int i = 0; i < points; ++i) {
    xs.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  }
  return xs;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

TEST(SpecFun, E1ReferenceValues) {
  // Frozen from the long-double power series oracle.
  EXPECT_NEAR(e1(1.0).value, 0.219383934395520, 1e-14);
  EXPECT_NEAR(e1(0.5).value, 0.559773594776160, 1e-14);
  EXPECT_NEAR(oracle::e1_series(1.0), 0.219383934395520, 1e-14);
  EXPECT_NEAR(oracle::e1_series(0.5), 0.559773594776160, 1e-14);
}

TEST(SpecFun, E1LargeArgumentAsymptote) {
  const double x = 500.0;
  EXPECT_NEAR(e1(x).value * std::exp(x) * (1.0 + x), 1.0, 1e-2);
  EXPECT_EQ(e1(800.0).value, 0.0);
}

TEST(SpecFun, EiReferenceValues) {
  EXPECT_NEAR(ei(1.0).value, 1.895117816355937, 1e-14);
  EXPECT_NEAR(ei(0.372507410781367).value, 0.0, 1e-12);
  EXPECT_LT(std::exp(-600.0) * ei(600.0).value, 1e-2);
}

TEST(SpecFun, ScaledE1ReferenceValues) {
  EXPECT_NEAR(exp_e1_scaled(1.0), 0.596347362323194, 1e-14);
  EXPECT_NEAR(exp_e1_scaled(10.0), 0.0915633339397881, 1e-15);
  EXPECT_NEAR(oracle::scaled_e1_backward_cf(10.0), 0.0915633339397881, 1e-15);
  const double big = exp_e1_scaled(1e5);
  EXPECT_GT(big, 1.0 / (1.0 + 1e5));
  EXPECT_LT(big, 1.0 / 1e5);
  EXPECT_TRUE(std::isfinite(exp_e1_scaled(1e9)));
}

TEST(SpecFun, DomainErrors) {
  EXPECT_THROW(e1(0.0), std::domain_error);
  EXPECT_THROW(e1(-1.0), std::domain_error);
  EXPECT_THROW(ei(0.0), std::domain_error);
  EXPECT_THROW(exp_e1_scaled(-2.0), std::domain_error);
  EXPECT_THROW(exp_ei_scaled(0.0), std::domain_error);
  EXPECT_THROW(e1(std::nan("")), std::domain_error);
}

TEST(SpecFun, E1MatchesSeriesAndContinuedFractionOracles) {
  for (double x : log_grid(1e-6, 100.0, 241)) {
    if (x <= 2.0) {
      EXPECT_LE(rel_err(e1(x).value, oracle::e1_series(x)), 1e-12) << x;
    }
    if (x >= 0.5) {
      const double cf = std::exp(-x) * oracle::scaled_e1_backward_cf(x);
      EXPECT_LE(rel_err(e1(x).value, cf), 1e-12) << x;
    }
    EXPECT_LE(rel_err(e1(x).value, boost::math::expint(1, x)), 1e-12) << x;
  }
}

TEST(SpecFun, EiMatchesSeriesOracle) {
  for (double x : log_grid(1e-6, 700.0, 241)) {
    const double want =
        x <= 40.0 ? oracle::ei_series(x) : boost::math::expint(x);
    const double got = ei(x).value;
    // Absolute near the zero of Ei, relative elsewhere.
    EXPECT_LE(std::abs(got - want), 1e-12 * std::max(1.0, std::abs(want))) << x;
  }
}

TEST(SpecFun, ScaledEiMatchesUnscaled) {
  for (double x : log_grid(1e-3, 700.0, 60)) {
    EXPECT_LE(rel_err(exp_ei_scaled(x), std::exp(-x) * ei(x).value), 1e-12)
        << x;
  }
  // Beyond overflow of Ei itself the scaled form behaves like 1/x.
  EXPECT_NEAR(exp_ei_scaled(1e6) * 1e6, 1.0, 1e-5);
}

TEST(SpecFun, SandwichBounds) {
  for (double x : log_grid(1e-8, 1e6, 300)) {
    const double v = exp_e1_scaled(x);
    EXPECT_GE(v, 1.0 / (1.0 + x)) << x;
    EXPECT_LE(v, 1.0 / x) << x;
  }
}

TEST(SpecFun, Monotone) {
  const auto xs = log_grid(1e-6, 700.0, 400);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    EXPECT_GT(e1(xs[i - 1]).value, e1(xs[i]).value);
    EXPECT_LT(ei(xs[i - 1]).value, ei(xs[i]).value);
  }
}

TEST(SpecFun, SumIsTwiceHyperbolicSineIntegral) {
  // Ei(x) + E1(x) = 2 Shi(x) = 2 int_0^x sinh(t)/t dt.
  for (double x : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 25.0, 50.0}) {
    const double shi = oracle::integrate(
        [](double t) { return t < 1e-8 ? 1.0 : std::sinh(t) / t; }, 0.0, x,
        1e-14);
    const double got = ei(x).value + e1(x).value;
    EXPECT_LE(rel_err(got, 2.0 * shi), 1e-10) << x;
  }
}

TEST(SpecFun, ErrorEstimateWithinTarget) {
  for (double x : log_grid(1e-8, 700.0, 200)) {
    for (const auto& r : {e1(x), ei(x)}) {
      EXPECT_GE(r.est_abs_error, 0.0);
      EXPECT_LE(r.est_abs_error, 1e-12 * std::max(1.0, std::abs(r.value))) << x;
    }
  }
}

}  // namespace
}  // namespace ehrelay
