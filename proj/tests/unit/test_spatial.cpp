// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <complex>
#include <set>
#include <utility>
#include <vector>

#include "urllc/urllc.hpp"

using namespace urllc;
using namespace urllc::spatial;

TEST(SpatialCorrelation, Anchors) {
  EXPECT_DOUBLE_EQ(spatial_correlation(0.0, 0.1), 1.0);
  EXPECT_LT(std::fabs(spatial_correlation(0.3, 0.1)), 0.2);
  EXPECT_NEAR(spatial_correlation(0.03827, 0.1), 0.0, 1e-3);
  EXPECT_THROW(spatial_correlation(-1.0, 0.1), InvalidArgument);
}

TEST(SpatialCorrelation, BeyondThreeWavelengths) {
  for (double d = 3.0; d < 30.0; d += 0.01) EXPECT_LT(std::fabs(spatial_correlation(d, 1.0)), 0.2) << d;
}

TEST(ConditionalFade, MeanAndVariance) {
  const std::complex<double> hp{0.8, -0.3};
  const auto c = conditional_spatial_fade(hp, 0.2, 1.0);
  EXPECT_EQ(c.mean, 0.2 * hp);
  EXPECT_DOUBLE_EQ(c.variance, 0.96);
  const auto z = conditional_spatial_fade({0.0, 0.0}, 0.2, 1.0);
  EXPECT_EQ(z.mean, std::complex<double>(0.0, 0.0));
  const auto i = conditional_spatial_fade(hp, 0.0, 2.5);
  EXPECT_EQ(i.mean, std::complex<double>(0.0, 0.0));
  EXPECT_DOUBLE_EQ(i.variance, 2.5);
  const auto d = conditional_spatial_fade(hp, 0.03827, 0.1, 1.0);
  EXPECT_NEAR(d.variance, 1.0, 1e-6);
  EXPECT_THROW(conditional_spatial_fade(hp, 0.2, 0.0), InvalidArgument);
  EXPECT_THROW(conditional_spatial_fade(hp, 1.2, 1.0), InvalidArgument);
}

TEST(ConditionalFade, LawOfTotalVariance) {
  const double sigma2 = 1.7, rho = 0.6;
  CounterStream rng(5, 0);
  RunningStats re, im;
  for (int i = 0; i < 400000; ++i) {
    const auto hp = rng.complex_normal(sigma2);
    const auto c = conditional_spatial_fade(hp, rho, sigma2);
    const auto hq = c.mean + rng.complex_normal(c.variance);
    re.add(hq.real());
    im.add(hq.imag());
  }
  const double var = re.variance() + im.variance();
  // Sample variance of 8e5 Gaussian components: relative SE about 0.2%.
  EXPECT_NEAR(var, sigma2, 0.01 * sigma2);
}

TEST(Penalty, Values) {
  EXPECT_DOUBLE_EQ(correlation_variance_penalty_db(0.0), 0.0);
  EXPECT_NEAR(correlation_variance_penalty_db(0.2), 0.177, 5e-4);
  EXPECT_NEAR(correlation_variance_penalty_db(0.5), 1.249, 5e-4);
  EXPECT_NEAR(correlation_variance_penalty_db(-0.5), 1.249, 5e-4);
  EXPECT_THROW(correlation_variance_penalty_db(1.0), InvalidArgument);
  EXPECT_THROW(correlation_variance_penalty_db(-1.0), InvalidArgument);
  double prev = 0.0;
  for (double r = 0.01; r < 0.99; r += 0.01) {
    const double p = correlation_variance_penalty_db(r);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(QModel, Extremes) {
  const auto same = q_correlated_link_fades(12, 0.0, 3);
  for (const auto& f : same) EXPECT_EQ(f, same.front());
  const auto fresh = q_correlated_link_fades(12, 1.0, 3);
  std::set<std::pair<double, double>> distinct;
  for (const auto& f : fresh) distinct.insert({f.real(), f.imag()});
  EXPECT_EQ(distinct.size(), 12u);
  EXPECT_THROW(q_correlated_link_fades(0, 0.5, 1), InvalidArgument);
  EXPECT_THROW(q_correlated_link_fades(3, 1.5, 1), InvalidArgument);
}

TEST(QModel, IndependentWhenQIsOne) {
  CounterStream rng(8, 0);
  const QCorrelatedFades g(1.0);
  std::vector<std::complex<double>> f;
  double cross = 0, p0 = 0, p1 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    g.generate(rng, f, 2);
    cross += (f[0] * std::conj(f[1])).real();
    p0 += std::norm(f[0]);
    p1 += std::norm(f[1]);
  }
  const double r = cross / std::sqrt(p0 * p1);
  EXPECT_LT(std::fabs(r), 4.0 / std::sqrt(2.0 * n));
}

TEST(QModel, DistinctCount) {
  CounterStream rng(21, 0);
  const QCorrelatedFades g(0.5);
  std::vector<std::complex<double>> f;
  const int draws = 100000;
  double total = 0;
  for (int i = 0; i < draws; ++i) {
    g.generate(rng, f, 10);
    std::set<std::pair<double, double>> d;
    for (const auto& x : f) d.insert({x.real(), x.imag()});
    total += static_cast<double>(d.size());
  }
  EXPECT_NEAR(total / draws, 5.5, 0.05);
}

TEST(QModel, MarginalIsUnitRayleigh) {
  for (double q : {0.0, 0.3, 1.0}) {
    CounterStream rng(17, 0);
    const QCorrelatedFades g(q);
    std::vector<std::complex<double>> f;
    std::vector<double> last;
    for (int i = 0; i < 50000; ++i) {
      g.generate(rng, f, 8);
      last.push_back(std::norm(f.back()));
    }
    std::sort(last.begin(), last.end());
    const double d = ks_distance(last, [](double x) { return -std::expm1(-x); });
    // 1% critical value for n = 5e4 is 1.63/sqrt(n).
    EXPECT_LT(d, 1.63 / std::sqrt(50000.0)) << "q=" << q;
  }
}
