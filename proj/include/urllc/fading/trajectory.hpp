// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "urllc/fading/environment.hpp"

namespace urllc::fading {

struct Trajectory {
  Vec2 start;
  double speed = 0.0;
  double heading = 0.0;

  Vec2 position(double t) const {
    return {start.x + speed * t * std::cos(heading), start.y + speed * t * std::sin(heading)};
  }
};

struct ChannelTrace {
  std::vector<double> times;
  std::vector<std::complex<double>> coefficients;

  std::size_t size() const { return times.size(); }
};

inline ChannelTrace channel_trace(const ScatterEnvironment& env, const Trajectory& traj,
                                  std::span<const double> times) {
  detail::require(traj.speed >= 0.0, "trajectory speed must be >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    detail::require(times[i] > times[i - 1], "trace times must be strictly increasing");
  const Room room = env.room();
  for (double t : times) {
    if (!room.contains(traj.position(t)))
      throw TrajectoryExitsRoom(t, "trajectory leaves the room at t = " + std::to_string(t) + " s");
  }
  FieldEvaluator field(env);
  ChannelTrace tr;
  tr.times.assign(times.begin(), times.end());
  tr.coefficients.reserve(times.size());
  for (double t : times) tr.coefficients.push_back(field(traj.position(t)));
  return tr;
}

inline std::vector<double> uniform_times(double t0, double dt, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = t0 + dt * static_cast<double>(i);
  return t;
}

}  // namespace urllc::fading
