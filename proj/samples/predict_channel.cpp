// SPDX-License-Identifier: Apache-2.0
// Observe one simulated Jakes trace at -2, -1, 0 ms and predict how likely
// the channel is to stay above the 10 dB / 1 bit/s/Hz threshold further out.
#include <cstdio>
#include <vector>

#include "urllc/urllc.hpp"

using namespace urllc;

int main() {
  const fading::EnsembleSpec spec;
  const double speed = 10.0, lambda = spec.wavelength();
  const auto member = fading::ensemble_member(spec, 7, speed * 0.01);
  const fading::Trajectory path{member.rx.start, speed, member.rx.heading};
  const std::vector<double> past{0.0, 1e-3, 2e-3};
  const auto trace = fading::channel_trace(member.env, path, past);

  // Time zero is the latest observation.
  const predict::ObservationSet obs{{-2e-3, -1e-3, 0.0}, trace.coefficients, speed, lambda};
  const fading::FieldEvaluator field(member.env);

  const double threshold = 0.1;
  std::printf("%10s %12s %12s %12s\n", "horizon_wl", "predicted", "actual", "P(good)");
  for (double wl : {0.01, 0.05, 0.1, 0.25, 0.5}) {
    const double t = wl * lambda / speed;
    const auto p = predict::predict(obs, t);
    const double actual = std::norm(field(path.position(t + 2e-3)));
    std::printf("%10.2f %12.4f %12.4f %12.4f\n", wl, std::norm(p.mean()), actual,
                predict::energy_exceedance(p, threshold));
  }
}
