// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "urllc/core/special.hpp"
#include "urllc/fading/covariance.hpp"

namespace urllc::predict {

struct ObservationSet {
  std::vector<double> times;
  std::vector<std::complex<double>> coefficients;
  double speed = 10.0;
  double wavelength = 0.1;

  void validate() const {
    detail::require(!times.empty(), "observation set must contain at least one sample");
    detail::require(times.size() == coefficients.size(), "times/coefficients length mismatch");
    detail::require(speed >= 0.0, "speed must be >= 0");
    detail::require(wavelength > 0.0, "wavelength must be > 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (times[i] == times[i - 1])
        throw SingularCovariance("duplicate observation time " + std::to_string(times[i]));
      detail::require(times[i] > times[i - 1], "observation times must be strictly increasing");
    }
  }
};

// Per-component covariance of the in-phase (or quadrature) process.
inline double component_covariance(double v, double dt, double wavelength) {
  return 0.5 * fading::theoretical_covariance(v, std::fabs(dt), wavelength);
}

struct CovarianceBlocks {
  Eigen::MatrixXd K;
  Eigen::RowVectorXd k_star;
  double k_star_star = 0.5;
};

inline CovarianceBlocks build_covariance(std::span<const double> times, double t_future,
                                         double v, double wavelength) {
  const auto m = static_cast<Eigen::Index>(times.size());
  CovarianceBlocks b;
  b.K.resize(m, m);
  b.k_star.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b.K(i, i) = 0.5;
    for (Eigen::Index j = i + 1; j < m; ++j)
      b.K(i, j) = b.K(j, i) = component_covariance(v, times[j] - times[i], wavelength);
    b.k_star(i) = component_covariance(v, t_future - times[i], wavelength);
  }
  b.k_star_star = 0.5;
  return b;
}

inline CovarianceBlocks build_covariance(const ObservationSet& obs, double t_future) {
  return build_covariance(obs.times, t_future, obs.speed, obs.wavelength);
}

struct GpPrediction {
  double mean_i = 0.0;
  double mean_q = 0.0;
  double variance = 0.5;  // sigma_c^2, per component
  double t_future = 0.0;

  std::complex<double> mean() const { return {mean_i, mean_q}; }
  double nu() const { return std::hypot(mean_i, mean_q); }
};

// Weights K^-1 K*^T for a fixed sampling pattern, reusable across traces.
class GpPredictor {
 public:
  GpPredictor(std::span<const double> times, double t_future, double v, double wavelength)
      : t_future_(t_future) {
    const auto b = build_covariance(times, t_future, v, wavelength);
    const auto m = b.K.rows();
    double jitter = 1e-10;
    for (;;) {
      Eigen::LLT<Eigen::MatrixXd> llt(b.K + jitter * Eigen::MatrixXd::Identity(m, m));
      if (llt.info() == Eigen::Success) {
        weights_ = llt.solve(b.k_star.transpose());
        if (weights_.allFinite()) break;
      }
      jitter *= 10.0;
      if (jitter > 1e-6 * 1.0000001)
        throw SingularCovariance("covariance matrix not positive definite even with 1e-6 jitter");
    }
    jitter_ = jitter;
    variance_ = std::clamp(b.k_star_star - b.k_star.dot(weights_), 0.0, b.k_star_star);
  }

  GpPrediction operator()(std::span<const std::complex<double>> h) const {
    detail::require(static_cast<Eigen::Index>(h.size()) == weights_.size(),
                    "coefficient count does not match the sampling pattern");
    GpPrediction p;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      p.mean_i += weights_(i) * h[static_cast<std::size_t>(i)].real();
      p.mean_q += weights_(i) * h[static_cast<std::size_t>(i)].imag();
    }
    p.variance = variance_;
    p.t_future = t_future_;
    return p;
  }

  const Eigen::VectorXd& weights() const { return weights_; }
  double variance() const { return variance_; }
  double jitter() const { return jitter_; }

 private:
  double t_future_;
  Eigen::VectorXd weights_;
  double variance_ = 0.5;
  double jitter_ = 0.0;
};

inline GpPrediction predict(const ObservationSet& obs, double t_future) {
  obs.validate();
  return GpPredictor(obs.times, t_future, obs.speed, obs.wavelength)(obs.coefficients);
}

// P(|h|^2 > threshold) and its complement. |h|^2 / sigma_c^2 is noncentral
// chi-square with 2 dof and noncentrality nu^2 / sigma_c^2.
inline std::pair<double, double> energy_tail_pair(const GpPrediction& p, double threshold) {
  detail::require(threshold >= 0.0, "energy threshold must be >= 0");
  const double nu = p.nu();
  if (threshold == 0.0) return {1.0, 0.0};
  if (p.variance <= 0.0) {
    const bool above = nu * nu > threshold;
    return {above ? 1.0 : 0.0, above ? 0.0 : 1.0};
  }
  const double s = std::sqrt(p.variance);
  return marcum_q1_pair(nu / s, std::sqrt(threshold) / s);
}

inline double energy_exceedance(const GpPrediction& p, double threshold) {
  return energy_tail_pair(p, threshold).first;
}

inline double energy_cdf(const GpPrediction& p, double x) {
  return energy_tail_pair(p, x).second;
}

// Inverse of energy_cdf by bisection on a bracket around the mean.
inline double energy_quantile(const GpPrediction& p, double prob) {
  detail::require(prob > 0.0 && prob < 1.0, "quantile probability must be in (0, 1)");
  if (p.variance <= 0.0) return p.nu() * p.nu();
  double lo = 0.0, hi = p.nu() * p.nu() + 2.0 * p.variance;
  while (energy_cdf(p, hi) < prob) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (energy_cdf(p, mid) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace urllc::predict
