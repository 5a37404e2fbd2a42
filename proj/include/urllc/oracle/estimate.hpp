// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "urllc/core/parallel.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/oracle/cycle.hpp"
#include "urllc/protocol/search.hpp"

namespace urllc::oracle {

struct OutageEstimate {
  double p_hat = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  std::uint64_t downlink_failures = 0;
  std::uint64_t uplink_failures = 0;
  Interval ci95{};

  double std_error() const {
    return trials ? std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials)) : 0.0;
  }
  double downlink_rate() const { return static_cast<double>(downlink_failures) / static_cast<double>(trials); }
  double uplink_rate() const { return static_cast<double>(uplink_failures) / static_cast<double>(trials); }
};

inline OutageEstimate make_estimate(std::uint64_t failures, std::uint64_t trials) {
  OutageEstimate e;
  e.trials = trials;
  e.failures = failures;
  e.p_hat = static_cast<double>(failures) / static_cast<double>(trials);
  e.ci95 = clopper_pearson(failures, trials);
  return e;
}

inline OutageEstimate estimate_outage(const ProtocolConfig& cfg, double snr_db,
                                      const UncertaintyBudget& budget, std::uint64_t trials,
                                      std::uint64_t seed, const Parallelism& par = {}) {
  detail::require(trials >= 1, "trials must be >= 1");
  const SimulationPlan plan(cfg, snr_db, budget);
  struct Counts {
    std::uint64_t any = 0, dl = 0, ul = 0;
  };
  const auto c = chunked_reduce<Counts>(
      trials, par,
      [&](std::uint64_t lo, std::uint64_t hi) {
        CycleSimulator sim(plan, seed);
        Counts k;
        for (std::uint64_t t = lo; t < hi; ++t) {
          const auto o = sim.run(t);
          k.any += o.failed();
          k.dl += o.downlink_failed;
          k.ul += o.uplink_failed;
        }
        return k;
      },
      [](Counts& a, const Counts& b) {
        a.any += b.any;
        a.dl += b.dl;
        a.ul += b.ul;
      });
  auto e = make_estimate(c.any, trials);
  e.downlink_failures = c.dl;
  e.uplink_failures = c.ul;
  return e;
}

// Monte Carlo minimum SNR for fixed (k1, k2). The same trials are replayed at
// every probe, so the estimated outage is monotone in SNR.
inline std::optional<double> mc_min_snr(const ProtocolConfig& cfg, const UncertaintyBudget& budget,
                                        double target, std::uint64_t trials, std::uint64_t seed,
                                        const protocol::SnrSearch& s = {},
                                        const Parallelism& par = {}) {
  auto outage = [&](double snr) {
    return estimate_outage(cfg, snr, budget, trials, seed, par).p_hat;
  };
  return protocol::bisect_snr(outage, target, s);
}

// Phase-refresh dynamics have no closed form; delegate to simulation.
inline OutageEstimate phase_refresh_cycle_outage(ProtocolConfig cfg, double snr_db,
                                                 std::uint64_t trials, std::uint64_t seed,
                                                 const Parallelism& par = {}) {
  detail::require(cfg.k1 == 1 && cfg.k2 == 1, "phase-refresh outage requires k1 = k2 = 1");
  cfg.dynamics = Dynamics::PhaseRefresh;
  return estimate_outage(cfg, snr_db, UncertaintyBudget{}, trials, seed, par);
}

}  // namespace urllc::oracle
