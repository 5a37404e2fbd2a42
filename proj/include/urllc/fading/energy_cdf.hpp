// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "urllc/core/parallel.hpp"
#include "urllc/core/special.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/fading/environment.hpp"

namespace urllc::fading {

inline double rayleigh_energy_cdf(double x) {
  detail::require(x >= 0.0, "energy must be >= 0");
  return -std::expm1(-x);
}

// Unit-mean energy with Rice factor K (LOS power K/(K+1)).
inline double rician_energy_cdf(double x, double k_factor) {
  detail::require(x >= 0.0, "energy must be >= 0");
  detail::require(k_factor >= 0.0, "Rice factor must be >= 0");
  if (k_factor == 0.0) return rayleigh_energy_cdf(x);
  const double a = std::sqrt(2.0 * k_factor);
  const double b = std::sqrt(2.0 * (k_factor + 1.0) * x);
  return marcum_q1_pair(a, b).second;
}

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> values) : v_(std::move(values)) {
    std::sort(v_.begin(), v_.end());
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(v_.begin(), v_.end(), x);
    return static_cast<double>(it - v_.begin()) / static_cast<double>(v_.size());
  }

  double ks_distance(const std::function<double(double)>& cdf) const {
    return urllc::ks_distance(v_, cdf);
  }

  const std::vector<double>& sorted() const { return v_; }
  std::size_t size() const { return v_.size(); }

 private:
  std::vector<double> v_;
};

// |h|^2 at one receiver position in each of `samples` fresh environments.
inline EmpiricalCdf empirical_energy_cdf(const EnsembleSpec& spec, std::size_t samples,
                                         const Parallelism& par = {}) {
  spec.validate();
  detail::require(samples >= 1, "samples must be >= 1");
  using Part = std::vector<double>;
  auto all = chunked_reduce<Part>(
      samples, par,
      [&](std::uint64_t lo, std::uint64_t hi) {
        Part out;
        out.reserve(hi - lo);
        for (std::uint64_t i = lo; i < hi; ++i) {
          const auto m = ensemble_member(spec, i);
          out.push_back(std::norm(FieldEvaluator(m.env)(m.rx.start)));
        }
        return out;
      },
      [](Part& acc, Part& p) { acc.insert(acc.end(), p.begin(), p.end()); });
  return EmpiricalCdf(std::move(all));
}

}  // namespace urllc::fading
