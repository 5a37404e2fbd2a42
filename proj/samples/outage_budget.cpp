// SPDX-License-Identifier: Apache-2.0
// Cycle outage of a 10-node Occupy CoW network under a nominal
// uncertainty budget, analytic vs Monte Carlo, then the cheapest SNR that
// meets 1e-6.
#include <cstdio>

#include "urllc/urllc.hpp"

using namespace urllc;

int main() {
  protocol::ProtocolConfig cfg;
  cfg.n = 10;
  cfg.k1 = 2;
  cfg.k2 = 2;
  const protocol::UncertaintyBudget budget{0.01, 1e-3, 1e-3};

  std::printf("R = %.3f bit/s/Hz\n", protocol::spectral_efficiency(cfg));
  std::printf("%8s %12s %12s %25s\n", "snr_db", "analytic", "mc", "95% CI");
  for (double snr : {4.0, 8.0, 12.0}) {
    const auto a = protocol::robust_cycle_outage(cfg, snr, budget);
    const auto e = oracle::estimate_outage(cfg, snr, budget, 200'000, 42);
    std::printf("%8.1f %12.4e %12.4e   [%.4e, %.4e]\n", snr, a.p_fail, e.p_hat, e.ci95.low, e.ci95.high);
  }

  const auto best = protocol::min_snr(cfg, budget, 1e-6);
  if (best.feasible)
    std::printf("target 1e-6: %.1f dB with k1=%d k2=%d (outage %.3e)\n", best.snr_db, best.k1, best.k2,
                best.p_fail);
  else
    std::printf("target 1e-6: infeasible on the search bracket\n");
}
