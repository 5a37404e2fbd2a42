// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>

#include "urllc/protocol/outage.hpp"

namespace urllc::protocol {

inline double max_tolerable_plink(int n, double target) {
  detail::require(target > 0.0 && target < 1.0, "target must lie in (0, 1)");
  detail::require(n >= 1, "n must be >= 1");
  if (n == 1) return target;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ideal_cycle_outage(n, mid) > target ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

struct SnrSearch {
  double lo_db = -10.0;
  double hi_db = 60.0;
  double resolution_db = 0.1;
  int k1_max = 8;
  int k2_max = 8;
};

struct MinSnrResult {
  bool feasible = false;
  double snr_db = 0.0;
  int k1 = 0;
  int k2 = 0;
  double p_fail = 1.0;
};

// Smallest SNR on the search bracket with outage(snr) <= target, assuming
// outage is nonincreasing in SNR. Returns nullopt if even hi_db misses it.
inline std::optional<double> bisect_snr(const std::function<double(double)>& outage,
                                        double target, const SnrSearch& s) {
  if (outage(s.hi_db) > target) return std::nullopt;
  if (outage(s.lo_db) <= target) return s.lo_db;
  double lo = s.lo_db, hi = s.hi_db;
  while (hi - lo > s.resolution_db) {
    const double mid = 0.5 * (lo + hi);
    (outage(mid) <= target ? hi : lo) = mid;
  }
  return hi;
}

inline MinSnrResult min_snr(const ProtocolConfig& tmpl, const UncertaintyBudget& budget,
                            double target, const SnrSearch& s = {}) {
  detail::require(target > 0.0 && target < 1.0, "target must lie in (0, 1)");
  MinSnrResult best;
  for (int sum = 2; sum <= s.k1_max + s.k2_max; ++sum) {
    for (int k1 = 1; k1 <= s.k1_max; ++k1) {
      const int k2 = sum - k1;
      if (k2 < 1 || k2 > s.k2_max) continue;
      ProtocolConfig cfg = tmpl;
      cfg.k1 = k1;
      cfg.k2 = k2;
      const RobustOutageModel model(cfg, budget);
      auto outage = [&](double snr) {
        return static_cast<double>(model.evaluate(link_probability(cfg, snr, budget)).p_fail);
      };
      const auto snr = bisect_snr(outage, target, s);
      if (snr && (!best.feasible || *snr < best.snr_db)) {
        best = {true, *snr, k1, k2, outage(*snr)};
      }
    }
  }
  return best;
}

}  // namespace urllc::protocol
