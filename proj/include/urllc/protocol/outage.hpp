// SPDX-License-Identifier: Apache-2.0
//
// Analytic cycle-failure engine. Conditions on the set A of nodes whose
// controller link is good; per-node failures are treated as independent
// given |A|, which is exact without slot corruption events.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "urllc/core/geometry.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/protocol/config.hpp"

namespace urllc::protocol {

using real = long double;

inline double spectral_efficiency(const ProtocolConfig& c) {
  c.validate();
  const double slots = c.scheme == Scheme::OccupyCow
                           ? 2.0 * c.n * (c.k1 + c.k2)
                           : static_cast<double>(c.n) * (2.0 * c.k1 + c.k2);
  return c.message_bits * slots / (c.cycle_time * c.bandwidth);
}

inline double link_outage(double snr_linear, double rate) {
  detail::require(snr_linear > 0.0, "SNR must be > 0");
  detail::require(rate >= 0.0, "rate must be >= 0");
  if (std::isinf(snr_linear)) return 0.0;
  return -std::expm1(-(std::exp2(rate) - 1.0) / snr_linear);
}

inline double robust_link(double p_w, double p_off) {
  detail::require(p_w >= 0.0 && p_w <= 1.0 && p_off >= 0.0 && p_off <= 1.0,
                  "link probabilities must lie in [0, 1]");
  return std::min(1.0, p_w + p_off);
}

inline double link_probability(const ProtocolConfig& cfg, double snr_db,
                               const UncertaintyBudget& b) {
  return robust_link(link_outage(db_to_linear(snr_db), spectral_efficiency(cfg)), b.p_off);
}

// sum_a P(A = a) [1 - (1 - p^min(a, cap))^(n - a)].
inline double capped_cycle_outage(int n, double p, int cap) {
  detail::require(n >= 1, "n must be >= 1");
  detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  detail::require(cap >= 1, "cap must be >= 1");
  const auto pa = binomial_pmf(n, 1.0L - static_cast<real>(p));
  CompensatedSum<real> s;
  for (int a = 0; a < n; ++a) {
    const real pr = std::pow(static_cast<real>(p), std::min(a, cap));
    s += pa[static_cast<std::size_t>(a)] * -std::expm1(static_cast<real>(n - a) * std::log1p(-pr));
  }
  return static_cast<double>(std::clamp(s.value(), 0.0L, 1.0L));
}

inline double ideal_cycle_outage(int n, double p) { return capped_cycle_outage(n, p, n); }

struct OutageReport {
  double p_fail = 0.0;
  double p_link = 0.0;
  double spectral_efficiency = 0.0;
  double snr_db = 0.0;
  std::vector<std::pair<std::string, double>> breakdown;
};

inline nlohmann::json to_json(const OutageReport& r) {
  nlohmann::json j;
  j["p_fail"] = r.p_fail;
  j["p_link"] = r.p_link;
  j["spectral_efficiency"] = r.spectral_efficiency;
  j["snr_db"] = r.snr_db;
  auto& b = j["breakdown"] = nlohmann::json::array();
  for (const auto& [label, v] : r.breakdown) b.push_back({{"phase", label}, {"contribution", v}});
  return j;
}

// Tables that do not depend on the link probability are built once; each
// evaluation is then polynomial in n.
class RobustOutageModel {
 public:
  struct Result {
    real p_fail = 0;
    real downlink = 0;  // expected undelivered downlink messages
    real uplink = 0;
  };

  RobustOutageModel(const ProtocolConfig& cfg, const UncertaintyBudget& b) : cfg_(cfg) {
    cfg.validate();
    b.validate();
    if (cfg.dynamics != Dynamics::QuasiStatic)
      throw InvalidArgument("analytic outage is quasi-static only; use the Monte Carlo oracle");
    if (cfg.q) throw InvalidArgument("the q-correlation model is evaluated by the Monte Carlo oracle");
    n_ = cfg.n;
    cap_ = cfg.cap ? std::min(*cfg.cap, n_) : n_;
    capped_ = cfg.cap && *cfg.cap < n_;
    const real pc = b.p_c, pg = b.p_g;
    const int k1 = cfg.k1, k2 = cfg.k2;

    pi_ = binomial_pmf(k1, 1.0L - pc);
    d_.resize(static_cast<std::size_t>(k1) + 1);
    for (int u = 0; u <= k1; ++u) d_[static_cast<std::size_t>(u)] = -std::expm1(u * std::log(pg));
    if (pg == 0.0L) {
      d_.assign(d_.size(), 1.0L);
      d_[0] = 0.0L;
    }

    // psi1(r): every one of k2 relay slots fails for one receiver;
    // psi2(r): at least one of two receivers misses all k2 slots.
    psi1_.resize(static_cast<std::size_t>(n_) + 3);
    psi2_.resize(psi1_.size());
    for (std::size_t r = 0; r < psi1_.size(); ++r) {
      const real lg = static_cast<real>(r) * std::log1p(-pc);  // log (1-pc)^r
      const real one = -std::expm1(lg + std::log1p(-pg));
      const real both = -std::expm1(lg + std::log1p(-pg * pg));
      psi1_[r] = pow_k(one, k2);
      psi2_[r] = std::clamp(2.0L * psi1_[r] - pow_k(both, k2), 0.0L, 1.0L);
    }
    if (cfg.scheme == Scheme::OccupyCow)
      build_occupy();
    else
      build_xor();
  }

  Result evaluate(double p_link) const {
    detail::require(p_link >= 0.0 && p_link <= 1.0, "p_link must lie in [0, 1]");
    const auto bq = binomial_rows(n_, 1.0L - static_cast<real>(p_link));
    const auto& pa = bq[static_cast<std::size_t>(n_)];
    Result res;
    CompensatedSum<real> total, dl, ul;
    for (int a = 0; a <= n_; ++a) {
      const real w = pa[static_cast<std::size_t>(a)];
      if (w == 0.0L) continue;
      NodeFailure fa{}, fn{};
      if (a >= 1) fa = cfg_.scheme == Scheme::OccupyCow ? occupy_in(bq, a) : xor_node(bq, a, true);
      if (a < n_) fn = cfg_.scheme == Scheme::OccupyCow ? occupy_out(bq, a) : xor_node(bq, a, false);
      const real la = a ? static_cast<real>(a) * std::log1p(-std::min(fa.any, 1.0L)) : 0.0L;
      const real ln = a < n_ ? static_cast<real>(n_ - a) * std::log1p(-std::min(fn.any, 1.0L)) : 0.0L;
      total += w * -std::expm1(la + ln);
      dl += w * (a * fa.dl + (n_ - a) * fn.dl);
      ul += w * (a * fa.ul + (n_ - a) * fn.ul);
    }
    res.p_fail = std::clamp(total.value(), 0.0L, 1.0L);
    res.downlink = dl.value();
    res.uplink = ul.value();
    return res;
  }

 private:
  struct NodeFailure {
    real any = 0, dl = 0, ul = 0;
  };
  using Rows = std::vector<std::vector<real>>;

  static real pow_k(real x, int k) {
    if (x <= 0.0L) return 0.0L;
    return std::exp(static_cast<real>(k) * std::log(x));
  }

  std::size_t idx(int v) const { return static_cast<std::size_t>(v); }
  real psi1(int r) const { return psi1_[idx(r)]; }
  real psi2(int r) const { return psi2_[idx(r)]; }
  int capr(int m) const { return std::min(m, cap_); }

  // Relay phase with g useful and h useless decoding candidates (each decodes
  // with probability d) plus a useless source; cap chosen uniformly.
  real relay_fail_blind(int g, int h, real d, const Rows& bd) const {
    if (d == 0.0L) return 1.0L;
    if (!capped_) {
      const real none = std::pow(1.0L - d, static_cast<real>(g));
      real s = none;
      for (int m = 1; m <= g + h; ++m) {
        const real pm = bd[idx(g + h)][idx(m)] - none * (m <= h ? bd[idx(h)][idx(m)] : 0.0L);
        s += std::max(pm, 0.0L) * psi1(1 + m);
      }
      return s;
    }
    real s = 0.0L;
    for (int x = 0; x <= g; ++x) {
      const real px = bd[idx(g)][idx(x)];
      for (int y = 0; y <= h; ++y) {
        const real w = px * bd[idx(h)][idx(y)];
        if (x == 0) {
          s += w;
          continue;
        }
        const int tot = x + y;
        if (tot <= cap_) {
          s += w * psi1(1 + tot);
        } else {
          // P(all cap chosen are useless) = C(y, cap) / C(tot, cap)
          real none = 0.0L;
          if (y >= cap_) {
            none = 1.0L;
            for (int i = 0; i < cap_; ++i) none *= static_cast<real>(y - i) / static_cast<real>(tot - i);
          }
          s += w * (none + (1.0L - none) * psi1(1 + cap_));
        }
      }
    }
    return s;
  }

  void build_occupy() {
    const int k1 = cfg_.k1;
    rs_.assign(idx(n_) + 1, 0.0L);
    ru_.assign(idx(n_) + 1, 0.0L);
    rf_.assign(idx(n_) + 1, std::vector<real>(idx(n_) + 1, 0.0L));
    for (int u = 0; u <= k1; ++u) {
      const real pu = pi_[idx(u)], d = d_[idx(u)];
      if (pu == 0.0L) continue;
      const auto bd = binomial_rows(n_, d);
      for (int t = 0; t <= n_; ++t) {
        real s = 0.0L, su = 0.0L;
        for (int m = 0; m <= t; ++m) {
          s += bd[idx(t)][idx(m)] * psi1(1 + capr(m));
          su += bd[idx(t)][idx(m)] * (m == 0 ? 1.0L : psi1(1 + capr(m)));
        }
        rs_[idx(t)] += pu * (1.0L - d) * s;
        ru_[idx(t)] += pu * su;
      }
      for (int g = 0; g <= n_; ++g)
        for (int h = 0; g + h <= n_; ++h) rf_[idx(g)][idx(h)] += pu * relay_fail_blind(g, h, d, bd);
    }
  }

  // Node with a good controller link.
  NodeFailure occupy_in(const Rows& bq, int a) const {
    const real dlf = rs_[idx(a - 1)];
    const int pool = capped_ ? a - 1 : n_ - 1;
    real ulf = 0.0L;
    for (int t = 0; t <= pool; ++t) ulf += bq[idx(pool)][idx(t)] * rs_[idx(t)];
    return {dlf + (1.0L - dlf) * ulf, dlf, ulf};
  }

  // Node whose controller link is bad; g = good links into A, h = good links outside A.
  NodeFailure occupy_out(const Rows& bq, int a) const {
    NodeFailure f;
    const int rest = n_ - a - 1;
    for (int g = 0; g <= a; ++g) {
      const real wg = bq[idx(a)][idx(g)];
      if (wg == 0.0L) continue;
      const real dlf = rf_[idx(g)][idx(a - g)];
      real ulf;
      if (capped_) {
        ulf = ru_[idx(g)];
      } else {
        ulf = 0.0L;
        for (int h = 0; h <= rest; ++h) ulf += bq[idx(rest)][idx(h)] * rf_[idx(g)][idx(h)];
      }
      f.any += wg * (dlf + (1.0L - dlf) * ulf);
      f.dl += wg * dlf;
      f.ul += wg * ulf;
    }
    return f;
  }

  void build_xor() {
    const int k1 = cfg_.k1;
    for (auto* t : {&xa_, &xn_, &xa_dl_, &xa_ul_, &xn_one_}) t->assign(idx(n_) + 1, 0.0L);
    for (int ud = 0; ud <= k1; ++ud) {
      for (int uu = 0; uu <= k1; ++uu) {
        const real w = pi_[idx(ud)] * pi_[idx(uu)];
        if (w == 0.0L) continue;
        const real dd = d_[idx(ud)], du = d_[idx(uu)];
        const auto br = binomial_rows(n_, dd * du);
        for (int g = 0; g <= n_; ++g) {
          real fa = 0, fn = 0, fad = 0, fau = 0, fn1 = 0;
          for (int r = 0; r <= g; ++r) {
            const real pr = br[idx(g)][idx(r)];
            const int rc = capr(r);
            const real z1 = r == 0 ? 1.0L : psi1(rc);
            const real z2 = r == 0 ? 1.0L : psi2(rc);
            const real helped = psi1(1 + rc);  // one endpoint also transmits
            fn += pr * z2;
            fn1 += pr * z1;
            fa += pr * ((1.0L - dd) * du * helped + dd * (1.0L - du) * helped +
                        (1.0L - dd) * (1.0L - du) * z2);
            fad += pr * (1.0L - dd) * (du * helped + (1.0L - du) * z1);
            fau += pr * (1.0L - du) * (dd * helped + (1.0L - dd) * z1);
          }
          xa_[idx(g)] += w * fa;
          xn_[idx(g)] += w * fn;
          xa_dl_[idx(g)] += w * fad;
          xa_ul_[idx(g)] += w * fau;
          xn_one_[idx(g)] += w * fn1;
        }
      }
    }
  }

  NodeFailure xor_node(const Rows& bq, int a, bool in_a) const {
    const int pool = in_a ? a - 1 : a;
    NodeFailure f;
    for (int g = 0; g <= pool; ++g) {
      const real wg = bq[idx(pool)][idx(g)];
      if (in_a) {
        f.any += wg * xa_[idx(g)];
        f.dl += wg * xa_dl_[idx(g)];
        f.ul += wg * xa_ul_[idx(g)];
      } else {
        f.any += wg * xn_[idx(g)];
        f.dl += wg * xn_one_[idx(g)];
        f.ul += wg * xn_one_[idx(g)];
      }
    }
    return f;
  }

  ProtocolConfig cfg_;
  int n_ = 1;
  int cap_ = 1;
  bool capped_ = false;
  std::vector<real> pi_, d_, psi1_, psi2_;
  std::vector<real> rs_, ru_;
  Rows rf_;
  std::vector<real> xa_, xn_, xa_dl_, xa_ul_, xn_one_;
};

inline OutageReport robust_cycle_outage(const ProtocolConfig& cfg, double snr_db,
                                        const UncertaintyBudget& budget) {
  RobustOutageModel model(cfg, budget);
  OutageReport r;
  r.snr_db = snr_db;
  r.spectral_efficiency = spectral_efficiency(cfg);
  r.p_link = link_probability(cfg, snr_db, budget);
  const auto res = model.evaluate(r.p_link);
  r.p_fail = static_cast<double>(res.p_fail);
  r.breakdown = {{"downlink", static_cast<double>(res.downlink)},
                 {"uplink", static_cast<double>(res.uplink)}};
  return r;
}

}  // namespace urllc::protocol
