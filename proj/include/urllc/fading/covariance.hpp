// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "urllc/core/parallel.hpp"
#include "urllc/core/special.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/fading/trajectory.hpp"

namespace urllc::fading {

// Normalised covariance J0(2 pi v t / lambda); per-component covariance is half this.
inline double theoretical_covariance(double v, double t, double wavelength) {
  detail::require(wavelength > 0.0, "wavelength must be > 0");
  return bessel_j0(2.0 * std::numbers::pi * v * t / wavelength);
}

struct CovarianceEstimate {
  std::vector<double> lags;                 // seconds
  std::vector<std::complex<double>> mean;   // E[h(tau) h*(0)]
  RunningStats energy;                      // |h(0)|^2
  RunningStats in_quad;                     // Re h(0) * Im h(0)

  double distance_wavelengths(std::size_t i, double v, double wavelength) const {
    return v * lags[i] / wavelength;
  }
};

// A fixed heading applies to every member (isotropy checks).
inline CovarianceEstimate empirical_covariance(const EnsembleSpec& spec, double speed,
                                               const std::vector<double>& lags,
                                               std::size_t n_envs,
                                               const Parallelism& par = {},
                                               std::optional<double> heading = std::nullopt) {
  spec.validate();
  detail::require(speed >= 0.0, "speed must be >= 0");
  detail::require(!lags.empty() && lags.front() >= 0.0, "lags must be nonnegative");
  for (std::size_t i = 1; i < lags.size(); ++i)
    detail::require(lags[i] > lags[i - 1], "lags must be strictly increasing");
  detail::require(n_envs >= 1, "n_envs must be >= 1");

  struct Part {
    std::vector<std::complex<double>> sum;
    RunningStats energy, iq;
  };
  const double path = speed * lags.back();
  auto acc = chunked_reduce<Part>(
      n_envs, par,
      [&](std::uint64_t lo, std::uint64_t hi) {
        Part p;
        p.sum.assign(lags.size(), {0.0, 0.0});
        for (std::uint64_t i = lo; i < hi; ++i) {
          const auto m = ensemble_member(spec, i, path, heading);
          const Trajectory traj{m.rx.start, speed, m.rx.heading};
          FieldEvaluator field(m.env);
          const auto h0 = field(traj.position(0.0));
          for (std::size_t k = 0; k < lags.size(); ++k)
            p.sum[k] += (lags[k] == 0.0 ? h0 : field(traj.position(lags[k]))) * std::conj(h0);
          p.energy.add(std::norm(h0));
          p.iq.add(h0.real() * h0.imag());
        }
        return p;
      },
      [](Part& a, Part& b) {
        if (a.sum.empty()) a.sum.assign(b.sum.size(), {0.0, 0.0});
        for (std::size_t k = 0; k < b.sum.size(); ++k) a.sum[k] += b.sum[k];
        a.energy.merge(b.energy);
        a.iq.merge(b.iq);
      });
  CovarianceEstimate est;
  est.lags = lags;
  est.mean.resize(lags.size());
  for (std::size_t k = 0; k < lags.size(); ++k)
    est.mean[k] = acc.sum[k] / static_cast<double>(n_envs);
  est.energy = acc.energy;
  est.in_quad = acc.iq;
  return est;
}

// RMS of |E[h(tau) h*(0)] - J0| over the estimate's lags.
inline double covariance_rms_error(const CovarianceEstimate& est, double speed,
                                   double wavelength) {
  double s = 0.0;
  for (std::size_t k = 0; k < est.lags.size(); ++k) {
    const double d = std::abs(est.mean[k] - theoretical_covariance(speed, est.lags[k], wavelength));
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(est.lags.size()));
}

}  // namespace urllc::fading
