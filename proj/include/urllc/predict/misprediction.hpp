// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "urllc/core/parallel.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/fading/trajectory.hpp"
#include "urllc/predict/gp.hpp"

namespace urllc::predict {

// Past samples every `interval` seconds inside a window ending at t = 0.
struct SamplingSpec {
  double past_window = 3e-3;
  double interval = 1e-3;

  std::vector<double> times() const {
    detail::require(interval > 0.0 && past_window >= interval,
                    "sampling: need 0 < interval <= past window");
    const auto m = static_cast<std::size_t>(std::floor(past_window / interval + 1e-9));
    std::vector<double> t(m);
    for (std::size_t i = 0; i < m; ++i) t[i] = -static_cast<double>(m - 1 - i) * interval;
    return t;
  }
};

struct MispredictionOptions {
  double snr_db = 10.0;
  double rate = 1.0;                 // bits/s/Hz for the (2^R - 1)/SNR threshold
  std::optional<double> threshold;   // explicit energy threshold overrides rate
  SamplingSpec sampling{};
  double speed = 10.0;
  fading::EnsembleSpec ensemble{};
  std::size_t n_trials = 100000;

  double energy_threshold() const {
    if (threshold) return *threshold;
    return (std::exp2(rate) - 1.0) / std::pow(10.0, snr_db / 10.0);
  }
  double unconditional_outage() const { return -std::expm1(-energy_threshold()); }
};

struct MispredictionPoint {
  double horizon_wavelengths = 0.0;
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
  Interval ci{};
  double coverage = 0.0;  // fraction of true energies inside the central 90% interval

  double rate() const { return trials ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0; }
};

// Logarithmically spaced horizons (in wavelengths) from lo to hi.
inline std::vector<double> log_horizons(double lo, double hi, std::size_t count) {
  std::vector<double> h(count);
  for (std::size_t i = 0; i < count; ++i)
    h[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1));
  return h;
}

// All horizons share the same environments and past samples per trial.
inline std::vector<MispredictionPoint> misprediction_curve(const MispredictionOptions& o,
                                                           const std::vector<double>& horizons,
                                                           const Parallelism& par = {}) {
  o.ensemble.validate();
  detail::require(o.speed > 0.0, "misprediction: speed must be > 0");
  detail::require(o.n_trials >= 1, "misprediction: n_trials must be >= 1");
  const double lambda = o.ensemble.wavelength();
  const auto past = o.sampling.times();
  const double thr = o.energy_threshold();
  std::vector<GpPredictor> predictors;
  std::vector<double> future;
  double tmax = 0.0;
  for (double h : horizons) {
    detail::require(h >= 0.0, "horizons must be >= 0");
    const double t = h * lambda / o.speed;
    predictors.emplace_back(past, t, o.speed, lambda);
    future.push_back(t);
    tmax = std::max(tmax, t);
  }
  const double t0 = past.front();
  const double path = o.speed * (tmax - t0);

  struct Part {
    std::vector<std::uint64_t> err, cov;
  };
  const std::size_t nh = horizons.size();
  auto acc = chunked_reduce<Part>(
      o.n_trials, par,
      [&](std::uint64_t lo, std::uint64_t hi) {
        Part p{std::vector<std::uint64_t>(nh, 0), std::vector<std::uint64_t>(nh, 0)};
        std::vector<std::complex<double>> obs(past.size());
        for (std::uint64_t i = lo; i < hi; ++i) {
          const auto m = fading::ensemble_member(o.ensemble, i, path);
          const fading::Trajectory traj{m.rx.start, o.speed, m.rx.heading};
          fading::FieldEvaluator field(m.env);
          for (std::size_t k = 0; k < past.size(); ++k) obs[k] = field(traj.position(past[k] - t0));
          for (std::size_t k = 0; k < nh; ++k) {
            const double truth = std::norm(field(traj.position(future[k] - t0)));
            const auto pred = predictors[k](obs);
            const bool good_pred = energy_exceedance(pred, thr) > 0.5;
            if (good_pred != (truth > thr)) ++p.err[k];
            const double u = energy_cdf(pred, truth);
            if (u >= 0.05 && u <= 0.95) ++p.cov[k];
          }
        }
        return p;
      },
      [nh](Part& a, Part& b) {
        if (a.err.empty()) a = Part{std::vector<std::uint64_t>(nh, 0), std::vector<std::uint64_t>(nh, 0)};
        for (std::size_t k = 0; k < nh; ++k) {
          a.err[k] += b.err[k];
          a.cov[k] += b.cov[k];
        }
      });
  std::vector<MispredictionPoint> out;
  for (std::size_t k = 0; k < nh; ++k) {
    MispredictionPoint pt;
    pt.horizon_wavelengths = horizons[k];
    pt.trials = o.n_trials;
    pt.errors = acc.err.empty() ? 0 : acc.err[k];
    pt.ci = clopper_pearson(pt.errors, pt.trials);
    pt.coverage = acc.cov.empty() ? 0.0 : static_cast<double>(acc.cov[k]) / static_cast<double>(o.n_trials);
    out.push_back(pt);
  }
  return out;
}

inline MispredictionPoint misprediction_probability(const MispredictionOptions& o,
                                                    double horizon_wavelengths,
                                                    const Parallelism& par = {}) {
  return misprediction_curve(o, {horizon_wavelengths}, par).front();
}

struct CoherenceResult {
  double meters = 0.0;
  double wavelengths = 0.0;
  double floor = 0.0;
  double plateau = 0.0;
  int probes = 0;
};

// Smallest horizon whose misprediction reaches `reliability`. Probes reuse the
// same trials, so the estimated curve is a fixed function of the horizon.
inline CoherenceResult coherence_distance(double reliability, const MispredictionOptions& o,
                                          const Parallelism& par = {},
                                          double max_wavelengths = 1.0) {
  detail::require(reliability > 0.0 && reliability < 1.0, "reliability must be in (0, 1)");
  const double lambda = o.ensemble.wavelength();
  CoherenceResult r;
  auto probe = [&](double h) {
    ++r.probes;
    return misprediction_probability(o, h, par).rate();
  };
  r.floor = probe(0.0);
  r.plateau = probe(max_wavelengths);
  if (reliability > r.plateau)
    throw UnreachableReliability("requested misprediction level " + std::to_string(reliability) +
                                 " exceeds the plateau " + std::to_string(r.plateau));
  double hit = 0.0;
  if (reliability > r.floor) {
    double lo = 1e-3 * max_wavelengths, hi = max_wavelengths;
    bool log_scale = true;
    if (probe(lo) >= reliability) {
      hi = lo;
      lo = 0.0;
      log_scale = false;
    }
    for (int it = 0; it < 24; ++it) {
      const double mid = log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
      (probe(mid) >= reliability ? hi : lo) = mid;
      if (hi - lo <= 1e-3 * hi) break;
    }
    hit = hi;
  }
  r.wavelengths = hit;
  r.meters = hit * lambda;
  return r;
}

}  // namespace urllc::predict
