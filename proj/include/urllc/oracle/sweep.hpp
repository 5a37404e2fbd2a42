// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "urllc/core/csv.hpp"
#include "urllc/oracle/estimate.hpp"

namespace urllc::oracle {

class ScenarioError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct SweepPoint {
  ProtocolConfig cfg;
  UncertaintyBudget budget;
  double snr_db = 0.0;
};

struct Scenario {
  std::vector<SweepPoint> points;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
};

namespace scenario_detail {

template <class T>
std::vector<T> axis(const nlohmann::json& j, const char* field, std::vector<T> def) {
  if (!j.contains(field)) return def;
  const auto& v = j.at(field);
  std::vector<T> out;
  try {
    if (v.is_array()) {
      if (v.empty()) throw ScenarioError(std::string("field '") + field + "': empty axis");
      for (const auto& e : v) out.push_back(e.get<T>());
    } else {
      out.push_back(v.get<T>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("field '") + field + "': " + e.what());
  }
  return out;
}

// Optional-valued axis: null means "absent".
template <class T>
std::vector<std::optional<T>> opt_axis(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) return {std::nullopt};
  const auto& v = j.at(field);
  std::vector<std::optional<T>> out;
  auto one = [&](const nlohmann::json& e) {
    if (e.is_null()) return std::optional<T>{};
    return std::optional<T>{e.get<T>()};
  };
  try {
    if (v.is_array()) {
      if (v.empty()) throw ScenarioError(std::string("field '") + field + "': empty axis");
      for (const auto& e : v) out.push_back(one(e));
    } else {
      out.push_back(one(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("field '") + field + "': " + e.what());
  }
  return out;
}

inline std::string where(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const std::string& text) {
  using namespace scenario_detail;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("scenario: malformed JSON at " + where(text, e.byte > 0 ? e.byte - 1 : 0) +
                        ": " + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario: top level must be an object");
  static const std::set<std::string> known = {
      "scheme", "n", "snr_db", "p_off", "p_c", "p_g", "k1", "k2", "cap", "q", "dynamics",
      "refresh", "message_bits", "cycle_time", "bandwidth", "trials", "seed"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ScenarioError("scenario: unknown field '" + k + "'");
  if (!j.contains("n")) throw ScenarioError("scenario: missing required field 'n'");
  if (!j.contains("snr_db")) throw ScenarioError("scenario: missing required field 'snr_db'");

  Scenario sc;
  try {
    sc.trials = j.value("trials", std::uint64_t{100000});
    sc.seed = j.value("seed", std::uint64_t{1});
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("field 'trials'/'seed': ") + e.what());
  }
  if (sc.trials < 1) throw ScenarioError("field 'trials': must be >= 1");

  const auto schemes = axis<std::string>(j, "scheme", {"occupy"});
  const auto ns = axis<int>(j, "n", {});
  const auto snrs = axis<double>(j, "snr_db", {});
  const auto poffs = axis<double>(j, "p_off", {0.0});
  const auto pcs = axis<double>(j, "p_c", {0.0});
  const auto pgs = axis<double>(j, "p_g", {0.0});
  const auto k1s = axis<int>(j, "k1", {1});
  const auto k2s = axis<int>(j, "k2", {1});
  const auto caps = opt_axis<int>(j, "cap");
  const auto qs = opt_axis<double>(j, "q");
  const auto dyns = axis<std::string>(j, "dynamics", {"quasi-static"});
  const auto refs = axis<std::string>(j, "refresh", {"every-phase"});
  const auto ms = axis<double>(j, "message_bits", {160.0});
  const auto ts = axis<double>(j, "cycle_time", {2e-3});
  const auto ws = axis<double>(j, "bandwidth", {20e6});
  if (ms.size() != 1 || ts.size() != 1 || ws.size() != 1)
    throw ScenarioError("fields 'message_bits', 'cycle_time', 'bandwidth' must be scalars");

  for (const auto& sch : schemes)
    for (const auto& dyn : dyns)
      for (const auto& ref : refs)
        for (int n : ns)
          for (int k1 : k1s)
            for (int k2 : k2s)
              for (const auto& cap : caps)
                for (const auto& q : qs)
                  for (double poff : poffs)
                    for (double pc : pcs)
                      for (double pg : pgs)
                        for (double snr : snrs) {
                          SweepPoint p;
                          try {
                            p.cfg.scheme = protocol::parse_scheme(sch);
                            p.cfg.dynamics = protocol::parse_dynamics(dyn);
                            p.cfg.refresh = protocol::parse_refresh(ref);
                          } catch (const InvalidArgument& e) {
                            throw ScenarioError(std::string("scenario: ") + e.what());
                          }
                          p.cfg.n = n;
                          p.cfg.k1 = k1;
                          p.cfg.k2 = k2;
                          p.cfg.cap = cap;
                          p.cfg.q = q;
                          p.cfg.message_bits = ms[0];
                          p.cfg.cycle_time = ts[0];
                          p.cfg.bandwidth = ws[0];
                          p.budget = {poff, pc, pg};
                          p.snr_db = snr;
                          try {
                            p.cfg.validate();
                            p.budget.validate();
                          } catch (const InvalidArgument& e) {
                            throw ScenarioError(std::string("scenario: ") + e.what());
                          }
                          sc.points.push_back(p);
                        }
  return sc;
}

struct SweepRow {
  SweepPoint point;
  OutageEstimate estimate;
  std::optional<double> analytic;
  double wall_seconds = 0.0;

  std::optional<bool> agrees() const {
    if (!analytic) return std::nullopt;
    return *analytic >= estimate.ci95.low && *analytic <= estimate.ci95.high;
  }
};

inline bool has_analytic(const SweepPoint& p) {
  return p.cfg.dynamics == Dynamics::QuasiStatic && !p.cfg.q;
}

// Runs every grid point in order; `sink` receives each row as it completes.
inline void run_sweep(const Scenario& sc, bool with_analytic,
                      const std::function<void(const SweepRow&)>& sink,
                      const Parallelism& par = {}) {
  for (const auto& p : sc.points) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.point = p;
    row.estimate = estimate_outage(p.cfg, p.snr_db, p.budget, sc.trials, sc.seed, par);
    if (with_analytic && has_analytic(p))
      row.analytic = protocol::robust_cycle_outage(p.cfg, p.snr_db, p.budget).p_fail;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sink(row);
  }
}

inline std::vector<std::string> sweep_header(bool with_analytic) {
  std::vector<std::string> h = {"scheme", "n", "snr_db", "p_off", "p_c", "p_g", "k1", "k2",
                                "cap", "q", "dynamics", "refresh", "p_hat", "failures",
                                "trials", "ci_low", "ci_high", "wall_seconds"};
  if (with_analytic) {
    h.push_back("analytic");
    h.push_back("analytic_in_ci");
  }
  return h;
}

inline std::vector<std::string> sweep_cells(const SweepRow& r, bool with_analytic) {
  const auto& c = r.point.cfg;
  std::vector<std::string> v = {
      protocol::to_string(c.scheme), csv::integer(c.n), csv::db(r.point.snr_db),
      csv::prob(r.point.budget.p_off), csv::prob(r.point.budget.p_c), csv::prob(r.point.budget.p_g),
      csv::integer(c.k1), csv::integer(c.k2), c.cap ? csv::integer(*c.cap) : "none",
      c.q ? csv::prob(*c.q) : "none", protocol::to_string(c.dynamics),
      protocol::to_string(c.refresh), csv::prob(r.estimate.p_hat),
      csv::integer(static_cast<std::int64_t>(r.estimate.failures)),
      csv::integer(static_cast<std::int64_t>(r.estimate.trials)), csv::prob(r.estimate.ci95.low),
      csv::prob(r.estimate.ci95.high), csv::fixed(r.wall_seconds, 3)};
  if (with_analytic) {
    v.push_back(r.analytic ? csv::prob(*r.analytic) : "n/a");
    const auto a = r.agrees();
    v.push_back(a ? (*a ? "yes" : "no") : "n/a");
  }
  return v;
}

}  // namespace urllc::oracle
