// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "urllc/core/parallel.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/fading/trajectory.hpp"

namespace urllc::fading {

struct PacketVariationOptions {
  double speed = 10.0;
  double packet_duration = 50e-6;
  double good_threshold_db = -7.0;
  std::size_t n_trials = 10000;
  std::size_t points = 50;
};

struct Ccdf {
  std::vector<double> sorted;  // ascending

  // P(X > x)
  double operator()(double x) const {
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
  }
  double percentile(double p) const { return quantile(sorted, p); }
  std::size_t size() const { return sorted.size(); }
};

struct PacketVariation {
  Ccdf all;          // max/min energy ratio in dB, every trial
  Ccdf conditioned;  // trials whose initial energy exceeds the threshold
};

inline PacketVariation within_packet_variation(const EnsembleSpec& spec,
                                               const PacketVariationOptions& o,
                                               const Parallelism& par = {}) {
  spec.validate();
  detail::require(o.packet_duration > 0.0, "packet duration must be > 0");
  detail::require(o.n_trials >= 10000, "packet variation needs at least 1e4 trials");
  detail::require(o.points >= 50, "packet variation needs at least 50 points per packet");
  detail::require(o.speed >= 0.0, "speed must be >= 0");
  const auto times =
      uniform_times(0.0, o.packet_duration / static_cast<double>(o.points - 1), o.points);
  const double good = std::pow(10.0, o.good_threshold_db / 10.0);
  const double path = o.speed * o.packet_duration;

  struct Part {
    std::vector<double> all, cond;
  };
  auto acc = chunked_reduce<Part>(
      o.n_trials, par,
      [&](std::uint64_t lo, std::uint64_t hi) {
        Part p;
        for (std::uint64_t i = lo; i < hi; ++i) {
          const auto m = ensemble_member(spec, i, path);
          const Trajectory traj{m.rx.start, o.speed, m.rx.heading};
          FieldEvaluator field(m.env);
          double e0 = 0.0, lo_e = INFINITY, hi_e = 0.0;
          for (std::size_t k = 0; k < times.size(); ++k) {
            const double e = std::norm(field(traj.position(times[k])));
            if (k == 0) e0 = e;
            lo_e = std::min(lo_e, e);
            hi_e = std::max(hi_e, e);
          }
          const double r = hi_e == lo_e ? 0.0 : 10.0 * std::log10(hi_e / lo_e);
          p.all.push_back(r);
          if (e0 > good) p.cond.push_back(r);
        }
        return p;
      },
      [](Part& a, Part& b) {
        a.all.insert(a.all.end(), b.all.begin(), b.all.end());
        a.cond.insert(a.cond.end(), b.cond.begin(), b.cond.end());
      });
  std::sort(acc.all.begin(), acc.all.end());
  std::sort(acc.cond.begin(), acc.cond.end());
  return {Ccdf{std::move(acc.all)}, Ccdf{std::move(acc.cond)}};
}

}  // namespace urllc::fading
