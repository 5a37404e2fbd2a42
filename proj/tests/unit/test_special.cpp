// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "urllc/core/special.hpp"

using namespace urllc;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// J0 power series in 50-digit arithmetic; exact enough for x <= 30.
double j0_oracle(double xd) {
  const Big x = xd, q = x * x / 4;
  Big term = 1, sum = 1;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (Big(k) * k);
    sum += term;
    if (abs(term) < Big("1e-45")) break;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST(BesselJ0, GoldenValues) {
  EXPECT_EQ(bessel_j0(0.0), 1.0);
  EXPECT_NEAR(bessel_j0(2.404825557695773), 0.0, 1e-12);
  EXPECT_NEAR(bessel_j0(std::numbers::pi), -0.304242177644094, 1e-12);
  EXPECT_NEAR(bessel_j0(0.6283185307179586), 0.903712642092466, 1e-12);
  EXPECT_NEAR(bessel_j0(-std::numbers::pi), bessel_j0(std::numbers::pi), 0.0);
}

TEST(BesselJ0, MatchesSeriesOracleUpTo30) {
  double worst = 0.0;
  for (double x = 0.0; x <= 30.0; x += 0.0173) worst = std::max(worst, std::fabs(bessel_j0(x) - j0_oracle(x)));
  EXPECT_LT(worst, 1e-13);
}

TEST(BesselJ0, MatchesMultiprecisionUpTo1e4) {
  double worst = 0.0;
  for (double x = 25.0; x <= 1e4; x += 7.31)
    worst = std::max(worst, std::fabs(bessel_j0(x) - static_cast<double>(boost::math::cyl_bessel_j(0, Big(x)))));
  EXPECT_LT(worst, 1e-12);
}

TEST(BesselJ0, BranchBoundariesAreContinuous) {
  for (double x : {8.0, 25.0})
    EXPECT_NEAR(bessel_j0(std::nextafter(x, 0.0)), bessel_j0(std::nextafter(x, 100.0)), 1e-13);
}

TEST(MarcumQ1, GoldenValues) {
  EXPECT_NEAR(marcum_q1(2.0, 2.0), 0.6035009606, 1e-9);
  EXPECT_DOUBLE_EQ(marcum_q1(1.5, 0.0), 1.0);
  for (double b : {0.1, 1.0, 3.0, 7.0})
    EXPECT_NEAR(marcum_q1(0.0, b) / std::exp(-b * b / 2.0), 1.0, 1e-12);
}

TEST(MarcumQ1, PairSumsToOne) {
  for (double a : {0.0, 0.7, 5.0, 40.0})
    for (double b : {0.2, 3.0, 39.0, 45.0}) {
      const auto [q, p] = marcum_q1_pair(a, b);
      EXPECT_NEAR(q + p, 1.0, 1e-12) << a << " " << b;
    }
}

// Both tails against the noncentral chi-square law evaluated in 50 digits.
TEST(MarcumQ1, MatchesNoncentralChiSquareOracle) {
  for (double a : {0.0, 0.5, 1.0, 3.0, 10.0, 20.0, 34.0, 40.0, 100.0})
    for (double b : {0.1, 1.0, 2.0, 5.0, 10.0, 20.0, 33.0, 35.0, 41.0, 50.0, 99.0, 101.0}) {
      const auto [q, p] = marcum_q1_pair(a, b);
      boost::math::non_central_chi_squared_distribution<Big> d(2, Big(a * a));
      const double Q = static_cast<double>(cdf(complement(d, Big(b * b))));
      const double P = static_cast<double>(cdf(d, Big(b * b)));
      if (Q > 1e-250) { EXPECT_NEAR(q / Q, 1.0, 1e-8) << "Q a=" << a << " b=" << b; }
      if (P > 1e-250) { EXPECT_NEAR(p / P, 1.0, 1e-8) << "1-Q a=" << a << " b=" << b; }
    }
}

TEST(MarcumQ1, MonotoneInBothArguments) {
  double prev = 1.0;
  for (double b = 0.0; b < 12.0; b += 0.25) {
    const double q = marcum_q1(3.0, b);
    EXPECT_LE(q, prev);
    prev = q;
  }
  prev = 0.0;
  for (double a = 0.0; a < 12.0; a += 0.25) {
    const double q = marcum_q1(a, 4.0);
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(Normal, TailsAreAccurate) {
  EXPECT_NEAR(normal_ccdf(6.0) / 9.865876450376946e-10, 1.0, 1e-12);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 0.0);
}
