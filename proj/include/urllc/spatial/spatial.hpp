// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "urllc/core/random.hpp"
#include "urllc/core/special.hpp"

namespace urllc::spatial {

inline double spatial_correlation(double distance, double wavelength) {
  detail::require(distance >= 0.0, "distance must be >= 0");
  detail::require(wavelength > 0.0, "wavelength must be > 0");
  return bessel_j0(2.0 * std::numbers::pi * distance / wavelength);
}

struct SpatialFadeConditional {
  std::complex<double> mean;
  double variance = 0.0;
  double rho = 0.0;
};

inline SpatialFadeConditional conditional_spatial_fade(std::complex<double> h_p, double rho,
                                                       double sigma2) {
  detail::require(sigma2 > 0.0, "sigma^2 must be > 0");
  detail::require(std::fabs(rho) <= 1.0, "correlation must lie in [-1, 1]");
  return {rho * h_p, sigma2 * (1.0 - rho * rho), rho};
}

inline SpatialFadeConditional conditional_spatial_fade(std::complex<double> h_p, double distance,
                                                       double wavelength, double sigma2) {
  return conditional_spatial_fade(h_p, spatial_correlation(distance, wavelength), sigma2);
}

// SNR increase restoring the unconditional variance when h_p = 0.
inline double correlation_variance_penalty_db(double rho) {
  detail::require(std::fabs(rho) < 1.0, "penalty undefined for |rho| = 1");
  return -10.0 * std::log10(1.0 - rho * rho);
}

// Pessimistic correlation model: each fade after the first is fresh CN(0,1)
// with probability q, otherwise a copy of a uniformly chosen earlier fade.
class QCorrelatedFades {
 public:
  explicit QCorrelatedFades(double q) : q_(q) {
    detail::require(q >= 0.0 && q <= 1.0, "q must lie in [0, 1]");
  }

  template <class Rng>
  void generate(Rng& rng, std::vector<std::complex<double>>& out, std::size_t n_links) const {
    out.clear();
    out.reserve(n_links);
    for (std::size_t i = 0; i < n_links; ++i) {
      const double u = rng.uniform();
      if (i == 0 || u < q_) {
        out.push_back(rng.complex_normal(1.0));
      } else {
        const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        out.push_back(out[std::min(j, i - 1)]);
      }
    }
  }

 private:
  double q_;
};

inline std::vector<std::complex<double>> q_correlated_link_fades(std::size_t n_links, double q,
                                                                 std::uint64_t seed) {
  detail::require(n_links >= 1, "n_links must be >= 1");
  CounterStream rng(seed, 0);
  std::vector<std::complex<double>> out;
  QCorrelatedFades(q).generate(rng, out, n_links);
  return out;
}

}  // namespace urllc::spatial
