// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urllc/core/error.hpp"

namespace urllc::protocol {

enum class Scheme { OccupyCow, XorCow };
enum class Dynamics { QuasiStatic, PhaseRefresh };
// Where links are redrawn in phase-refresh mode.
enum class RefreshPoints { EveryPhase, DownlinkUplink };

inline std::string to_string(Scheme s) { return s == Scheme::OccupyCow ? "occupy" : "xor"; }
inline std::string to_string(Dynamics d) {
  return d == Dynamics::QuasiStatic ? "quasi-static" : "phase-refresh";
}
inline std::string to_string(RefreshPoints r) {
  return r == RefreshPoints::EveryPhase ? "every-phase" : "dl-ul";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "occupy" || s == "occupy-cow") return Scheme::OccupyCow;
  if (s == "xor" || s == "xor-cow") return Scheme::XorCow;
  throw InvalidArgument("unknown scheme '" + s + "' (expected occupy or xor)");
}
inline Dynamics parse_dynamics(const std::string& s) {
  if (s == "quasi-static" || s == "qs") return Dynamics::QuasiStatic;
  if (s == "phase-refresh" || s == "pr") return Dynamics::PhaseRefresh;
  throw InvalidArgument("unknown dynamics '" + s + "' (expected quasi-static or phase-refresh)");
}
inline RefreshPoints parse_refresh(const std::string& s) {
  if (s == "every-phase") return RefreshPoints::EveryPhase;
  if (s == "dl-ul") return RefreshPoints::DownlinkUplink;
  throw InvalidArgument("unknown refresh mode '" + s + "' (expected every-phase or dl-ul)");
}

struct ProtocolConfig {
  Scheme scheme = Scheme::OccupyCow;
  int n = 10;
  double message_bits = 160.0;
  double cycle_time = 2e-3;
  double bandwidth = 20e6;
  int k1 = 1;
  int k2 = 1;
  std::optional<int> cap;
  Dynamics dynamics = Dynamics::QuasiStatic;
  std::optional<double> q;
  RefreshPoints refresh = RefreshPoints::EveryPhase;

  int phases() const { return scheme == Scheme::OccupyCow ? 4 : 3; }

  void validate() const {
    detail::require(n >= 1, "n must be >= 1");
    detail::require(message_bits > 0.0 && cycle_time > 0.0 && bandwidth > 0.0,
                    "message size, cycle time and bandwidth must be > 0");
    detail::require(k1 >= 1 && k2 >= 1, "k1 and k2 must be >= 1");
    detail::require(!cap || *cap >= 1, "cap must be >= 1");
    detail::require(!q || (*q >= 0.0 && *q <= 1.0), "q must lie in [0, 1]");
  }
};

struct UncertaintyBudget {
  double p_off = 0.0;
  double p_c = 0.0;
  double p_g = 0.0;

  bool is_zero() const { return p_off == 0.0 && p_c == 0.0 && p_g == 0.0; }

  void validate() const {
    for (double v : {p_off, p_c, p_g})
      detail::require(v >= 0.0 && v <= 1.0, "uncertainty probabilities must lie in [0, 1]");
  }

  // Values outside the nominal table ranges are allowed but reported.
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (p_off > 0.1) w.push_back("p_off above nominal range [0, 0.1]");
    if (p_c > 1e-2) w.push_back("p_c above nominal range [0, 1e-2]");
    if (p_g > 1e-2) w.push_back("p_g above nominal range [0, 1e-2]");
    return w;
  }
};

}  // namespace urllc::protocol
