// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "urllc/core/error.hpp"

namespace urllc {

namespace detail {

inline double j0_series(double x) {
  const long double q = -0.25L * static_cast<long double>(x) * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L) break;
  }
  return static_cast<double>(sum);
}

// Miller backward recurrence normalised by J0 + 2*sum J_2k = 1.
inline double j0_miller(double x) {
  int n = 2 * (static_cast<int>(x / 2.0) + 24);
  long double jp1 = 0.0L;
  long double j = 1e-300L;
  long double norm = 0.0L;
  const long double lx = x;
  for (int k = n; k > 0; --k) {
    const long double jm1 = (2.0L * k / lx) * j - jp1;
    jp1 = j;
    j = jm1;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0L * j;
    if (std::fabs(j) > 1e300L) {
      j *= 1e-300L;
      jp1 *= 1e-300L;
      norm *= 1e-300L;
    }
  }
  norm += j;
  return static_cast<double>(j / norm);
}

// Hankel asymptotic expansion, summed until terms stop shrinking.
inline double j0_hankel(double x) {
  const long double z = 8.0L * x;
  long double p = 1.0L, q = 0.0L;
  long double t = 1.0L;
  long double prev = 1e300L;
  for (int k = 1; k < 200; ++k) {
    const long double m = 2.0L * k - 1.0L;
    t *= m * m / (k * z);
    if (std::fabs(t) >= prev) break;
    prev = std::fabs(t);
    switch (k % 4) {
      case 1: q -= t; break;
      case 2: p -= t; break;
      case 3: q += t; break;
      default: p += t; break;
    }
    if (std::fabs(t) < 1e-20L) break;
  }
  const double c = std::cos(x), s = std::sin(x);
  // cos(x - pi/4) and sin(x - pi/4) without subtracting from a large x.
  const double cc = (c + s) * std::numbers::sqrt2 / 2.0;
  const double ss = (s - c) * std::numbers::sqrt2 / 2.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) *
         static_cast<double>(p * cc - q * ss);
}

}  // namespace detail

inline double bessel_j0(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("bessel_j0: argument must be finite");
  x = std::fabs(x);
  if (x <= 8.0) return detail::j0_series(x);
  if (x <= 25.0) return detail::j0_miller(x);
  return detail::j0_hankel(x);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

namespace detail {

// Q1(a,b) = P(N_y <= N_x) for independent Poisson N_x ~ P(a^2/2), N_y ~ P(b^2/2).
// Both Q and 1-Q are accumulated from positive terms; returns {Q, 1-Q}.
inline std::pair<double, double> marcum_poisson(double x, double y) {
  long double wx = std::exp(-static_cast<long double>(x));  // Poisson(x) pmf at j
  long double wy = std::exp(-static_cast<long double>(y));  // Poisson(y) pmf at j
  long double gx = 0.0L;  // P(N_x <= j-1)
  long double gy = wy;    // P(N_y <= j)
  long double q = 0.0L, p = 0.0L;
  const double jmin = std::max(x, y) + 1.0;
  for (long j = 0; j < 1000000; ++j) {
    const long double tq = wx * gy;
    const long double tp = wy * gx;
    q += tq;
    p += tp;
    if (j > jmin && tq <= 1e-14L * q && tp <= 1e-14L * p) break;
    if (j > jmin && q == 0.0L && tp <= 1e-14L * p) break;
    if (j > jmin && p == 0.0L && tq <= 1e-14L * q) break;
    gx += wx;
    wx *= x / (j + 1.0L);
    wy *= y / (j + 1.0L);
    gy += wy;
  }
  const long double s = q + p;
  if (q <= p) return {static_cast<double>(q / s), static_cast<double>(1.0L - q / s)};
  return {static_cast<double>(1.0L - p / s), static_cast<double>(p / s)};
}

// Composite Gauss-Legendre on [lo, hi].
template <class F>
double gauss_legendre(F&& f, double lo, double hi, int panels) {
  static constexpr std::array<double, 8> xs = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> ws = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * h;
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += ws[i] * f(c + 0.5 * h * xs[i]);
    total += 0.5 * h * s;
  }
  return total;
}

// Large-argument route. Conditioning on the quadrature component z of a
// CN(a, 2) variable gives Q = 2 Phi(-b) + int_{-b}^{b} phi(z) [Phi(a - s) + Phi(-s - a)] dz
// with s = sqrt(b^2 - z^2); the in-disk mass is integrated the same way.
inline std::pair<double, double> marcum_integral(double a, double b) {
  const double zmax = std::min(b, 40.0);
  auto outside = [&](double z) {
    const double s = std::sqrt(std::max(0.0, b * b - z * z));
    return normal_pdf(z) * (normal_ccdf(s - a) + normal_cdf(-s - a));
  };
  auto inside = [&](double z) {
    const double s = std::sqrt(std::max(0.0, b * b - z * z));
    return normal_pdf(z) * (normal_cdf(s - a) - normal_cdf(-s - a));
  };
  double q, p;
  if (b <= 40.0) {
    // z = b sin t removes the square-root kink at |z| = b.
    auto qt = [&](double t) { return outside(b * std::sin(t)) * b * std::cos(t); };
    auto pt = [&](double t) { return inside(b * std::sin(t)) * b * std::cos(t); };
    const int panels = 64;
    q = 2.0 * normal_ccdf(b) + 2.0 * gauss_legendre(qt, 0.0, std::numbers::pi / 2, panels);
    p = 2.0 * gauss_legendre(pt, 0.0, std::numbers::pi / 2, panels);
  } else {
    q = 2.0 * gauss_legendre(outside, 0.0, zmax, 64);
    p = 2.0 * gauss_legendre(inside, 0.0, zmax, 64);
  }
  if (q <= p) return {q, 1.0 - q};
  return {1.0 - p, p};
}

}  // namespace detail

// First-order Marcum Q function and its complement, each accurate in the tail.
inline std::pair<double, double> marcum_q1_pair(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidArgument("marcum_q1: arguments must be finite and nonnegative");
  if (b == 0.0) return {1.0, 0.0};
  const double x = 0.5 * a * a, y = 0.5 * b * b;
  if (x + y <= 600.0) return detail::marcum_poisson(x, y);
  return detail::marcum_integral(a, b);
}

inline double marcum_q1(double a, double b) { return marcum_q1_pair(a, b).first; }

}  // namespace urllc
