// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "urllc/core/error.hpp"

namespace urllc {

// Neumaier compensated sum.
template <class T = double>
class CompensatedSum {
 public:
  void add(T v) noexcept {
    const T t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      c_ += (sum_ - t) + v;
    else
      c_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(T v) noexcept {
    add(v);
    return *this;
  }
  T value() const noexcept { return sum_ + c_; }

 private:
  T sum_{};
  T c_{};
};

// Binomial pmf table P(X = k), X ~ Bin(n, q), k = 0..n, evaluated in log domain.
inline std::vector<long double> binomial_pmf(int n, long double q) {
  std::vector<long double> out(static_cast<std::size_t>(n) + 1, 0.0L);
  if (q <= 0.0L) {
    out[0] = 1.0L;
    return out;
  }
  if (q >= 1.0L) {
    out[static_cast<std::size_t>(n)] = 1.0L;
    return out;
  }
  const long double lq = std::log(q), lp = std::log1p(-q);
  const long double lgn = std::lgamma(static_cast<long double>(n) + 1.0L);
  for (int k = 0; k <= n; ++k) {
    out[static_cast<std::size_t>(k)] =
        std::exp(lgn - std::lgamma(k + 1.0L) - std::lgamma(n - k + 1.0L) + k * lq +
                 (n - k) * lp);
  }
  return out;
}

// Triangular table rows[m][k] = P(Bin(m, q) = k) for m = 0..n.
inline std::vector<std::vector<long double>> binomial_rows(int n, long double q) {
  std::vector<std::vector<long double>> rows;
  rows.reserve(static_cast<std::size_t>(n) + 1);
  for (int m = 0; m <= n; ++m) rows.push_back(binomial_pmf(m, q));
  return rows;
}

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

// Exact (Clopper-Pearson) two-sided interval for a Binomial proportion.
inline Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double level = 0.95) {
  detail::require(n > 0 && k <= n, "clopper_pearson: need 0 <= k <= n, n > 0");
  const double a = 0.5 * (1.0 - level);
  Interval ci;
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  ci.low = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, a);
  ci.high = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - a);
  return ci;
}

// Linear-interpolation quantile of unsorted data (copy is sorted).
inline double quantile(std::vector<double> v, double p) {
  detail::require(!v.empty(), "quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

// Two-sided KS statistic of a sorted sample against a continuous CDF.
inline double ks_distance(const std::vector<double>& sorted,
                          const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct RunningStats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const RunningStats& o) noexcept {
    if (o.n == 0) return;
    const double tot = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / tot;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / tot;
    n += o.n;
  }
  double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const noexcept {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

}  // namespace urllc
