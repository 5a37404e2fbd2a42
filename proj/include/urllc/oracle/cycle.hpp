// SPDX-License-Identifier: Apache-2.0
//
// Direct simulation of one protocol cycle. Every random quantity is drawn by
// random access from (master seed, trial, key), so a realization does not
// depend on the order in which links or slots are inspected.
#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "urllc/core/random.hpp"
#include "urllc/protocol/outage.hpp"
#include "urllc/spatial/spatial.hpp"

namespace urllc::oracle {

using protocol::Dynamics;
using protocol::ProtocolConfig;
using protocol::RefreshPoints;
using protocol::Scheme;
using protocol::UncertaintyBudget;

inline constexpr int kController = 0;

enum class Direction { Downlink, Uplink };

struct SlotEvent {
  int phase = 0;
  int message = 0;  // source node of the message (1..n)
  int slot = 0;
  int participant = 0;  // transmitter or receiver (0 = controller)
  bool transmitter = true;
};

struct CycleRealization {
  // (a, b, phase) -> good. QuasiStatic stores a < b once per phase.
  std::map<std::tuple<int, int, int>, bool> link_states;
  std::map<std::tuple<int, int, int>, std::complex<double>> link_fades;
  std::vector<SlotEvent> slot_events;  // corruption events that occurred
  std::vector<bool> downlink_delivered;  // index 1..n
  std::vector<bool> uplink_delivered;

  bool failed() const {
    for (std::size_t i = 1; i < downlink_delivered.size(); ++i)
      if (!downlink_delivered[i] || !uplink_delivered[i]) return true;
    return false;
  }
};

// Per-configuration constants shared by all trials.
struct SimulationPlan {
  ProtocolConfig cfg;
  UncertaintyBudget budget;
  double snr_db = 0.0;
  double p_link = 0.0;
  double p_w = 0.0;
  double fade_threshold = 0.0;  // q-mode: |h|^2 below this is an outage
  double p_off_given_fade_ok = 0.0;

  SimulationPlan(const ProtocolConfig& c, double snr, const UncertaintyBudget& b)
      : cfg(c), budget(b), snr_db(snr) {
    c.validate();
    b.validate();
    const double rate = protocol::spectral_efficiency(c);
    const double snr_lin = db_to_linear(snr);
    p_w = protocol::link_outage(snr_lin, rate);
    p_link = protocol::robust_link(p_w, b.p_off);
    fade_threshold = (std::exp2(rate) - 1.0) / snr_lin;
    p_off_given_fade_ok = p_w < 1.0 ? std::min(1.0, b.p_off / (1.0 - p_w)) : 1.0;
  }

  int epoch(int phase) const {
    if (cfg.dynamics == Dynamics::QuasiStatic) return 0;
    if (cfg.refresh == RefreshPoints::EveryPhase) return phase;
    // Links change only between the downlink and uplink halves.
    return cfg.scheme == Scheme::OccupyCow ? phase / 2 : (phase == 0 ? 0 : 1);
  }
  int epochs() const {
    if (cfg.dynamics == Dynamics::QuasiStatic) return 1;
    return cfg.refresh == RefreshPoints::EveryPhase ? cfg.phases() : 2;
  }
};

namespace keys {

enum Tag : std::uint64_t { kLink = 1, kSlotTx = 2, kSlotRx = 3, kCapPick = 4 };

constexpr std::uint64_t key(std::uint64_t tag, std::uint64_t phase, std::uint64_t a,
                            std::uint64_t b, std::uint64_t c) {
  return (tag << 60) | (phase << 56) | (a << 40) | (b << 28) | (c << 12);
}

}  // namespace keys

class CycleSimulator {
 public:
  CycleSimulator(const SimulationPlan& plan, std::uint64_t seed)
      : plan_(plan), seed_(seed), n_(plan.cfg.n), stride_(n_ + 1) {
    cache_.assign(static_cast<std::size_t>(plan.epochs()) * stride_ * stride_, -1);
  }

  struct Outcome {
    bool downlink_failed = false;
    bool uplink_failed = false;
    bool failed() const { return downlink_failed || uplink_failed; }
  };

  // Fast path: stops at the first undelivered message of each direction.
  Outcome run(std::uint64_t trial) {
    begin(trial, nullptr);
    return plan_.cfg.scheme == Scheme::OccupyCow ? run_occupy(true) : run_xor(true);
  }

  CycleRealization realize(std::uint64_t trial) {
    CycleRealization rec;
    rec.downlink_delivered.assign(static_cast<std::size_t>(n_) + 1, true);
    rec.uplink_delivered.assign(static_cast<std::size_t>(n_) + 1, true);
    begin(trial, &rec);
    if (plan_.cfg.scheme == Scheme::OccupyCow)
      run_occupy(false);
    else
      run_xor(false);
    const bool qs = plan_.cfg.dynamics == Dynamics::QuasiStatic;
    for (int ph = 0; ph < plan_.cfg.phases(); ++ph)
      for (int a = 0; a <= n_; ++a)
        for (int b = 0; b <= n_; ++b) {
          if (a == b || (qs && a > b)) continue;
          rec.link_states[{a, b, ph}] = good(ph, a, b);
          if (!fades_.empty()) rec.link_fades[{a, b, ph}] = fade(ph, a, b);
        }
    rec_ = nullptr;
    return rec;
  }

  bool good(int phase, int tx, int rx) {
    const int e = plan_.epoch(phase);
    int a = tx, b = rx;
    if (plan_.cfg.dynamics == Dynamics::QuasiStatic && a > b) std::swap(a, b);
    auto& c = cache_[(static_cast<std::size_t>(e) * stride_ + static_cast<std::size_t>(a)) * stride_ +
                     static_cast<std::size_t>(b)];
    if (c < 0) c = draw_link(e, a, b) ? 1 : 0;
    return c == 1;
  }

 private:
  void begin(std::uint64_t trial, CycleRealization* rec) {
    trial_ = trial;
    rec_ = rec;
    std::fill(cache_.begin(), cache_.end(), static_cast<std::int8_t>(-1));
    if (plan_.cfg.q) make_fades();
  }

  // q-mode: per epoch, controller links (C,1)..(C,n) then node pairs in
  // lexicographic order; phase refresh adds the reverse direction after them.
  std::size_t link_ordinal(int a, int b) const {
    // a < b
    if (a == 0) return static_cast<std::size_t>(b - 1);
    const auto n = static_cast<std::size_t>(n_);
    const auto i = static_cast<std::size_t>(a - 1), j = static_cast<std::size_t>(b - 1);
    return n + i * (2 * n - i - 1) / 2 + (j - i - 1);
  }
  std::size_t undirected_links() const {
    const auto n = static_cast<std::size_t>(n_);
    return n + n * (n - 1) / 2;
  }

  void make_fades() {
    const bool directed = plan_.cfg.dynamics == Dynamics::PhaseRefresh;
    const std::size_t per = undirected_links() * (directed ? 2 : 1);
    fades_.resize(static_cast<std::size_t>(plan_.epochs()));
    spatial::QCorrelatedFades gen(*plan_.cfg.q);
    for (int e = 0; e < plan_.epochs(); ++e) {
      CounterStream rng(derive_seed(seed_, trial_), static_cast<std::uint64_t>(e) + 1);
      gen.generate(rng, fades_[static_cast<std::size_t>(e)], per);
    }
  }

  std::complex<double> fade(int phase, int a, int b) const {
    const int e = plan_.epoch(phase);
    std::size_t off = 0;
    if (a > b) {
      std::swap(a, b);
      if (plan_.cfg.dynamics == Dynamics::PhaseRefresh) off = undirected_links();
    }
    return fades_[static_cast<std::size_t>(e)][off + link_ordinal(a, b)];
  }

  bool draw_link(int e, int a, int b) {
    const double u = uniform_at(seed_, trial_,
                                keys::key(keys::kLink, static_cast<std::uint64_t>(e),
                                            static_cast<std::uint64_t>(a), 0,
                                            static_cast<std::uint64_t>(b)));
    if (!plan_.cfg.q) return u >= plan_.p_link;
    const std::size_t off =
        a > b && plan_.cfg.dynamics == Dynamics::PhaseRefresh ? undirected_links() : 0;
    const auto f = fades_[static_cast<std::size_t>(e)][off + link_ordinal(std::min(a, b), std::max(a, b))];
    return std::norm(f) >= plan_.fade_threshold && u >= plan_.p_off_given_fade_ok;
  }

  bool event(keys::Tag tag, int phase, int msg, int slot, int who, double p) {
    if (p <= 0.0) return false;
    const bool hit = uniform_at(seed_, trial_,
                                keys::key(tag, static_cast<std::uint64_t>(phase),
                                            static_cast<std::uint64_t>(msg),
                                            static_cast<std::uint64_t>(slot),
                                            static_cast<std::uint64_t>(who))) < p;
    if (hit && rec_)
      rec_->slot_events.push_back({phase, msg, slot, who, tag == keys::kSlotTx});
    return hit;
  }

  // Initial broadcast of message `msg` by `src`; receiver outcomes are drawn
  // on first query.
  class Broadcast {
   public:
    Broadcast() = default;
    void reset(CycleSimulator* sim, int phase, int msg, int src) {
      sim_ = sim;
      phase_ = phase;
      msg_ = msg;
      src_ = src;
      state_.assign(static_cast<std::size_t>(sim->n_) + 1, -1);
      clean_.assign(static_cast<std::size_t>(sim->plan_.cfg.k1), -1);
    }

    bool decoded(int j) {
      auto& st = state_[static_cast<std::size_t>(j)];
      if (st < 0) st = j == src_ ? 1 : compute(j);
      return st == 1;
    }

   private:
    bool clean(int s) {
      auto& c = clean_[static_cast<std::size_t>(s)];
      if (c < 0) c = sim_->event(keys::kSlotTx, phase_, msg_, s, src_, sim_->plan_.budget.p_c) ? 0 : 1;
      return c == 1;
    }
    std::int8_t compute(int j) {
      if (!sim_->good(phase_, src_, j)) return 0;
      for (int s = 0; s < static_cast<int>(clean_.size()); ++s)
        if (clean(s) && !sim_->event(keys::kSlotRx, phase_, msg_, s, j, sim_->plan_.budget.p_g))
          return 1;
      return 0;
    }

    CycleSimulator* sim_ = nullptr;
    int phase_ = 0, msg_ = 0, src_ = 0;
    std::vector<std::int8_t> state_;
    std::vector<std::int8_t> clean_;
  };

  // Uniformly keep `cap` of the candidates (partial Fisher-Yates).
  void apply_cap(int phase, int msg, std::vector<int>& relays) {
    if (!plan_.cfg.cap || static_cast<int>(relays.size()) <= *plan_.cfg.cap) return;
    const int cap = *plan_.cfg.cap;
    for (int k = 0; k < cap; ++k) {
      const double u = uniform_at(seed_, trial_,
                                  keys::key(keys::kCapPick, static_cast<std::uint64_t>(phase),
                                              static_cast<std::uint64_t>(msg), 0,
                                              static_cast<std::uint64_t>(k)));
      const auto span = relays.size() - static_cast<std::size_t>(k);
      const auto j = static_cast<std::size_t>(k) +
                     std::min(span - 1, static_cast<std::size_t>(u * static_cast<double>(span)));
      std::swap(relays[static_cast<std::size_t>(k)], relays[j]);
    }
    relays.resize(static_cast<std::size_t>(cap));
  }

  // k2 relay slots; every transmitter risks a per-slot corruption. Returns
  // per-receiver success for up to two receivers.
  std::pair<bool, bool> relay_slots(int phase, int msg, const std::vector<int>& tx, int rx1,
                                    bool useful1, int rx2, bool useful2) {
    bool ok1 = false, ok2 = false;
    for (int s = 0; s < plan_.cfg.k2 && !(ok1 && (ok2 || rx2 < 0)); ++s) {
      bool clean = true;
      for (int t : tx)
        if (event(keys::kSlotTx, phase, msg, s, t, plan_.budget.p_c)) clean = false;
      if (!clean) continue;
      if (useful1 && !ok1 && !event(keys::kSlotRx, phase, msg, s, rx1, plan_.budget.p_g)) ok1 = true;
      if (rx2 >= 0 && useful2 && !ok2 && !event(keys::kSlotRx, phase, msg, s, rx2, plan_.budget.p_g))
        ok2 = true;
    }
    return {ok1, ok2};
  }

  bool any_good(int phase, const std::vector<int>& tx, int rx) {
    for (int t : tx)
      if (t != rx && good(phase, t, rx)) return true;
    return false;
  }

  void mark(Direction d, int i) {
    if (!rec_) return;
    (d == Direction::Downlink ? rec_->downlink_delivered : rec_->uplink_delivered)[static_cast<std::size_t>(i)] = false;
  }

  Outcome run_occupy(bool early) {
    Outcome out;
    Broadcast dec;
    std::vector<int> tx, relays;
    for (int i = 1; i <= n_ && !(early && out.downlink_failed); ++i) {
      dec.reset(this, 0, i, kController);
      if (dec.decoded(i)) continue;
      relays.clear();
      for (int j = 1; j <= n_; ++j)
        if (j != i && dec.decoded(j)) relays.push_back(j);
      apply_cap(1, i, relays);
      tx.assign(1, kController);
      tx.insert(tx.end(), relays.begin(), relays.end());
      const bool useful = any_good(1, tx, i);
      if (!relay_slots(1, i, tx, i, useful, -1, false).first) {
        out.downlink_failed = true;
        mark(Direction::Downlink, i);
      }
    }
    for (int i = 1; i <= n_ && !(early && out.uplink_failed); ++i) {
      dec.reset(this, 2, i, i);
      if (dec.decoded(kController)) continue;
      relays.clear();
      for (int j = 1; j <= n_; ++j) {
        if (j == i || !dec.decoded(j)) continue;
        // Under a cap only nodes that heard the controller volunteer.
        if (plan_.cfg.cap && !good(0, kController, j)) continue;
        relays.push_back(j);
      }
      apply_cap(3, i, relays);
      tx.assign(1, i);
      tx.insert(tx.end(), relays.begin(), relays.end());
      const bool useful = any_good(3, tx, kController);
      if (!relay_slots(3, i, tx, kController, useful, -1, false).first) {
        out.uplink_failed = true;
        mark(Direction::Uplink, i);
      }
    }
    return out;
  }

  Outcome run_xor(bool early) {
    Outcome out;
    Broadcast d, u;
    std::vector<int> tx, relays;
    for (int i = 1; i <= n_; ++i) {
      if (early && out.downlink_failed && out.uplink_failed) break;
      d.reset(this, 0, i, kController);
      u.reset(this, 1, i, i);
      const bool need_d = !d.decoded(i);
      const bool need_u = !u.decoded(kController);
      if (!need_d && !need_u) continue;
      relays.clear();
      for (int j = 1; j <= n_; ++j)
        if (j != i && d.decoded(j) && u.decoded(j)) relays.push_back(j);
      apply_cap(2, i, relays);
      tx = relays;
      if (!need_u) tx.push_back(kController);
      if (!need_d) tx.push_back(i);
      const bool use_i = need_d && any_good(2, tx, i);
      const bool use_c = need_u && any_good(2, tx, kController);
      const auto [ok_i, ok_c] = relay_slots(2, i, tx, i, use_i, kController, use_c);
      if (need_d && !ok_i) {
        out.downlink_failed = true;
        mark(Direction::Downlink, i);
      }
      if (need_u && !ok_c) {
        out.uplink_failed = true;
        mark(Direction::Uplink, i);
      }
    }
    return out;
  }

  const SimulationPlan& plan_;
  std::uint64_t seed_;
  int n_;
  std::size_t stride_;
  std::uint64_t trial_ = 0;
  std::vector<std::int8_t> cache_;
  std::vector<std::vector<std::complex<double>>> fades_;
  CycleRealization* rec_ = nullptr;
};

inline CycleRealization simulate_cycle(const ProtocolConfig& cfg, double snr_db,
                                       const UncertaintyBudget& budget, std::uint64_t seed,
                                       std::uint64_t trial) {
  const SimulationPlan plan(cfg, snr_db, budget);
  CycleSimulator sim(plan, seed);
  return sim.realize(trial);
}

}  // namespace urllc::oracle
