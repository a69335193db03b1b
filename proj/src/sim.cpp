#include "mlo/sim.hpp"

#include "mlo/errors.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace mlo {

const char* to_string(StationKind k) {
  switch (k) {
  case StationKind::legacy: return "sld";
  case StationKind::ap: return "ap";
  case StationKind::nonap: return "mld";
  }
  return "?";
}

RngStream make_stream(std::uint64_t seed, StationKind kind, int index, int link) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(link)};
  RngStream rng;
  rng.seed(seq);
  return rng;
}

long draw_below(RngStream& rng, long n) {
  return boost::random::uniform_int_distribution<long>(0, n - 1)(rng);
}

const StationStats* SimStats::find(StationKind kind, int index, int link) const {
  for (const auto& s : stations)
    if (s.kind == kind && s.index == index && s.link == link) return &s;
  return nullptr;
}

namespace {

struct Sta {
  int stage = 0;
  long counter = 0;
  RngStream rng;
  StationCounters c;
};

struct TxRef {
  StationKind kind;
  int index;
};

/// AP head-of-line destination: index < 0 means a legacy station.
struct Dest {
  bool mld = false;
  int index = 0;
};

struct Exchange {
  bool active = false;
  std::int64_t start_slot = 0;
  std::int64_t busy_until = 0;  ///< first slot the link is idle again
  std::int64_t data_end_ns = 0; ///< grid time
  std::int64_t end_ns = 0;      ///< grid time of exchange end (before the trailing slot)
  std::int64_t exact_ns = 0;    ///< exchange duration used for time accounting
  bool success = false;
  bool ap_tx = false;
  Dest ap_dest;
  std::vector<TxRef> tx;
};

class Simulator {
public:
  Simulator(const ScenarioConfig& cfg, const SimOptions& opt) : cfg_(cfg), opt_(opt) {
    cfg_.validate();
    if (!(opt.duration_s >= 0.0) || !std::isfinite(opt.duration_s))
      throw ModelError("simulation duration must be >= 0");
    const SlotDurations d = compute_slot_durations(cfg_.phy);
    slot_ns_ = to_ns(d.t_empty);
    data_ns_ = to_ns(d.t_data);
    succ_ns_ = to_ns(d.t_success);
    coll_ns_ = to_ns(d.t_collision);
    gamma_ = cfg_.effective_gamma();
    total_slots_ = static_cast<std::int64_t>(std::ceil(opt.duration_s * 1e9 / static_cast<double>(slot_ns_) - 1e-9));
    if (total_slots_ < 0) total_slots_ = 0;

    const BackoffParams& b = cfg_.backoff;
    for (int l = 0; l < 2; ++l) {
      for (int i = 0; i < cfg_.n_sld; ++i) {
        sld_[l].push_back(Sta{});
        Sta& s = sld_[l].back();
        s.rng = make_stream(opt.seed, StationKind::legacy, i, l);
        s.counter = draw_below(s.rng, b.legacy_window(0));
      }
      if (opt_.ap_enabled) {
        ap_[l].rng = make_stream(opt.seed, StationKind::ap, 0, l);
        dest_[l] = draw_dest(ap_[l].rng, l);
        ap_[l].counter = draw_below(ap_[l].rng, b.window(0));
      }
    }
    mld_.resize(cfg_.n_mld);
    for (int d = 0; d < cfg_.n_mld; ++d)
      for (int l = 0; l < 2; ++l) {
        Sta& s = mld_[d][l];
        s.rng = make_stream(opt.seed, StationKind::nonap, d, l);
        s.counter = draw_below(s.rng, b.window(0));
      }
  }

  SimResult run() {
    std::int64_t t = 0;
    while (t < total_slots_) {
      for (int l = 0; l < 2; ++l)
        if (ex_[l].active && ex_[l].busy_until <= t) finalize(l, true);
      const bool idle[2] = {!ex_[0].active, !ex_[1].active};
      if (!idle[0] && !idle[1]) {
        t = std::min(ex_[0].busy_until, ex_[1].busy_until);
        continue;
      }
      step(t, idle);
      ++t;
    }
    const std::int64_t horizon = total_slots_;
    for (int l = 0; l < 2; ++l) {
      if (ex_[l].active) finalize(l, false);
      stats_.links[l].horizon_slots = std::max(horizon, last_busy_until_[l]);
    }
    stats_.grid_slots = total_slots_;
    stats_.slot_ns = slot_ns_;
    collect();
    return {stats_, report()};
  }

private:
  long window(StationKind k, int stage) const {
    return k == StationKind::legacy ? cfg_.backoff.legacy_window(stage) : cfg_.backoff.window(stage);
  }

  Dest draw_dest(RngStream& rng, int link) {
    (void)link;
    const bool to_mld = cfg_.n_mld > 0 && (cfg_.n_sld == 0 || boost::random::bernoulli_distribution<double>(gamma_)(rng));
    if (to_mld) return {true, static_cast<int>(draw_below(rng, cfg_.n_mld))};
    return {false, static_cast<int>(draw_below(rng, std::max(cfg_.n_sld, 1)))};
  }

  Sta& station(const TxRef& r, int link) {
    switch (r.kind) {
    case StationKind::legacy: return sld_[link][r.index];
    case StationKind::ap: return ap_[link];
    case StationKind::nonap: return mld_[r.index][link];
    }
    return ap_[link];
  }

  void restart(Sta& s, StationKind k) {
    s.counter = draw_below(s.rng, window(k, s.stage));
    ++s.c.restarts;
  }

  bool mld_busy_for(int d, int link, std::int64_t t) const {
    const Exchange& e = ex_[link];
    if (!e.active) return false;
    (void)t;
    if (opt_.permissive_wait && e.tx.size() == 1 && e.ap_tx && e.ap_dest.mld && e.ap_dest.index == d) return false;
    return true;
  }

  bool mld_transmitting_data(int d, int link, std::int64_t t_ns) const {
    const Exchange& e = ex_[link];
    if (!e.active || t_ns >= e.data_end_ns) return false;
    return std::any_of(e.tx.begin(), e.tx.end(),
                       [d](const TxRef& r) { return r.kind == StationKind::nonap && r.index == d; });
  }

  void step(std::int64_t t, const bool idle[2]) {
    const std::int64_t t_ns = t * slot_ns_;
    std::vector<TxRef> tx[2];
    bool ap_pad[2] = {false, false};

    // decisions at the slot boundary
    for (int l = 0; l < 2; ++l) {
      if (!idle[l]) continue;
      for (int i = 0; i < cfg_.n_sld; ++i)
        if (sld_[l][i].counter == 0) tx[l].push_back({StationKind::legacy, i});
    }

    if (opt_.ap_enabled) {
      for (int l = 0; l < 2; ++l) {
        if (!idle[l] || ap_[l].counter != 0) continue;
        const Dest& dst = dest_[l];
        const int o = 1 - l;
        if (idle[o] || (!dst.mld && !opt_.ap_restart_any_destination)) {
          tx[l].push_back({StationKind::ap, 0});
          continue;
        }
        const Exchange& eo = ex_[o];
        if (eo.ap_tx && t_ns < eo.data_end_ns) {
          tx[l].push_back({StationKind::ap, 0});
          if (eo.ap_dest.mld && eo.ap_dest.index == dst.index) ap_pad[l] = true;
        } else {
          restart(ap_[l], StationKind::ap);
        }
      }
    }

    for (int d = 0; d < cfg_.n_mld; ++d) {
      auto& s = mld_[d];
      if (s[0].counter == 0 && s[1].counter == 0 && idle[0] && idle[1]) {
        tx[0].push_back({StationKind::nonap, d});
        tx[1].push_back({StationKind::nonap, d});
        continue;
      }
      for (int l = 0; l < 2; ++l) {
        if (s[l].counter != 0) continue;
        if (mld_busy_for(d, l, t) || mld_busy_for(d, 1 - l, t)) {
          ++s[l].c.waits_broken;
          restart(s[l], StationKind::nonap);
        }
      }
    }

    // start exchanges
    bool started[2] = {false, false};
    for (int l = 0; l < 2; ++l) {
      if (!idle[l] || tx[l].empty()) continue;
      start(l, t, std::move(tx[l]));
      started[l] = true;
    }
    for (int l = 0; l < 2; ++l)
      if (started[l] && ex_[l].ap_tx) check_ap_start(l, t, ap_pad[l]);
    check_mld_pairing(t, started);

    // waiting non-AP links restart when a link they watch turns busy
    for (int d = 0; d < cfg_.n_mld; ++d) {
      for (int l = 0; l < 2; ++l) {
        Sta& s = mld_[d][l];
        if (s.counter != 0) continue;
        bool self_tx = false;
        for (int k = 0; k < 2; ++k)
          if (started[k])
            for (const TxRef& r : ex_[k].tx)
              if (r.kind == StationKind::nonap && r.index == d) self_tx = true;
        if (self_tx) continue;
        if ((started[l] && mld_busy_for(d, l, t)) || (started[1 - l] && mld_busy_for(d, 1 - l, t))) {
          ++s.c.waits_broken;
          restart(s, StationKind::nonap);
        }
      }
    }

    // idle slot bookkeeping and countdown
    for (int l = 0; l < 2; ++l) {
      if (!idle[l] || started[l]) continue;
      stats_.links[l].idle_slots += 1;
      stats_.links[l].idle_ns += slot_ns_;
      decrement_all(l, nullptr);
      trace(t, l, "idle", {}, 0);
    }
  }

  void start(int l, std::int64_t t, std::vector<TxRef> tx) {
    Exchange& e = ex_[l];
    e = Exchange{};
    e.active = true;
    e.start_slot = t;
    e.tx = std::move(tx);
    e.success = e.tx.size() == 1;
    const std::int64_t t_ns = t * slot_ns_;
    e.data_end_ns = t_ns + data_ns_;
    e.exact_ns = e.success ? succ_ns_ : coll_ns_;
    e.end_ns = t_ns + e.exact_ns;
    e.busy_until = ceil_div(e.end_ns, slot_ns_) + 1;

    for (const TxRef& r : e.tx) {
      Sta& s = station(r, l);
      ++s.c.attempts;
      if (e.success) {
        ++s.c.successes;
        if (r.kind == StationKind::ap) (dest_[l].mld ? s.c.successes_to_mld : s.c.successes_to_sld) += 1;
      } else {
        ++s.c.collisions;
      }
      if (r.kind == StationKind::ap) {
        e.ap_tx = true;
        e.ap_dest = dest_[l];
      }
    }

    std::string who;
    for (const TxRef& r : e.tx) {
      if (!who.empty()) who += ';';
      who += fmt::format("{}{}", to_string(r.kind), r.kind == StationKind::ap ? "" : std::to_string(r.index));
      if (r.kind == StationKind::ap) who += dest_[l].mld ? fmt::format(">mld{}", dest_[l].index) : fmt::format(">sld{}", dest_[l].index);
    }
    trace(t, l, e.success ? "success" : "collision", std::move(who), e.exact_ns);
  }

  /// End-time alignment of AP DL to the same non-AP MLD on both links, and
  /// the NSTR receive guard for that destination.
  void check_ap_start(int l, std::int64_t t, bool pad_other) {
    const std::int64_t t_ns = t * slot_ns_;
    Exchange& e = ex_[l];
    const int o = 1 - l;
    Exchange& eo = ex_[o];
    if (e.ap_dest.mld && mld_transmitting_data(e.ap_dest.index, o, t_ns) &&
        !mld_transmitting_data(e.ap_dest.index, l, t_ns))
      ++stats_.nstr_violations;
    if (pad_other) {
      const std::int64_t pad = e.data_end_ns - eo.data_end_ns;
      if (pad > 0) {
        eo.data_end_ns += pad;
        eo.end_ns += pad;
        eo.exact_ns += pad;
        eo.busy_until = ceil_div(eo.end_ns, slot_ns_) + 1;
      }
    }
    if (eo.active && eo.ap_tx && e.ap_dest.mld && eo.ap_dest.mld && eo.ap_dest.index == e.ap_dest.index &&
        eo.data_end_ns > t_ns && (eo.start_slot < t || l == 0)) {
      ++stats_.aligned_dl_pairs;
      if (eo.data_end_ns != e.data_end_ns) ++stats_.alignment_violations;
    }
  }

  /// A non-AP MLD transmission must occupy both links with equal data start
  /// and end.
  void check_mld_pairing(std::int64_t t, const bool started[2]) {
    for (int l = 0; l < 2; ++l) {
      if (!started[l]) continue;
      for (const TxRef& r : ex_[l].tx) {
        if (r.kind != StationKind::nonap) continue;
        const Exchange& eo = ex_[1 - l];
        const bool paired = started[1 - l] && eo.start_slot == t && eo.data_end_ns == ex_[l].data_end_ns &&
                            std::any_of(eo.tx.begin(), eo.tx.end(), [&](const TxRef& q) {
                              return q.kind == StationKind::nonap && q.index == r.index;
                            });
        if (!paired)
          ++stats_.nstr_violations;
        else if (l == 0)
          ++stats_.mld_paired_tx;
      }
    }
  }

  static std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

  void decrement_all(int l, const Exchange* e) {
    auto is_tx = [e](StationKind k, int i) {
      if (!e) return false;
      return std::any_of(e->tx.begin(), e->tx.end(), [&](const TxRef& r) { return r.kind == k && r.index == i; });
    };
    for (int i = 0; i < cfg_.n_sld; ++i)
      if (sld_[l][i].counter > 0 && !is_tx(StationKind::legacy, i)) --sld_[l][i].counter;
    if (opt_.ap_enabled && ap_[l].counter > 0 && !is_tx(StationKind::ap, 0)) --ap_[l].counter;
    for (int d = 0; d < cfg_.n_mld; ++d)
      if (mld_[d][l].counter > 0 && !is_tx(StationKind::nonap, d)) --mld_[d][l].counter;
  }

  void finalize(int l, bool update_backoff) {
    Exchange& e = ex_[l];
    LinkStats& ls = stats_.links[l];
    ls.busy_slots += static_cast<std::uint64_t>(e.busy_until - e.start_slot);
    ls.busy_ns += e.exact_ns + slot_ns_;
    last_busy_until_[l] = e.busy_until;
    if (update_backoff) {
      for (const TxRef& r : e.tx) {
        Sta& s = station(r, l);
        s.stage = e.success ? 0 : std::min(s.stage + 1, cfg_.backoff.m);
        if (r.kind == StationKind::ap && e.success) dest_[l] = draw_dest(s.rng, l);
        s.counter = draw_below(s.rng, window(r.kind, s.stage));
      }
      decrement_all(l, &e);
    }
    e.active = false;
  }

  void trace(std::int64_t t, int l, const char* ev, std::string who, std::int64_t dur) {
    if (stats_.trace.size() >= opt_.trace_limit) return;
    stats_.trace.push_back({t, l, ev, std::move(who), dur});
  }

  void collect() {
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < cfg_.n_sld; ++i) stats_.stations.push_back({StationKind::legacy, i, l, sld_[l][i].c});
    if (opt_.ap_enabled)
      for (int l = 0; l < 2; ++l) stats_.stations.push_back({StationKind::ap, 0, l, ap_[l].c});
    for (int d = 0; d < cfg_.n_mld; ++d)
      for (int l = 0; l < 2; ++l) stats_.stations.push_back({StationKind::nonap, d, l, mld_[d][l].c});
  }

  ThroughputReport report() const {
    ThroughputReport r;
    r.scenario = cfg_;
    r.source = ThroughputReport::Source::simulated;
    const double bits = cfg_.phy.payload_bits();
    auto rate = [&](std::uint64_t n, int l) {
      const std::int64_t ns = stats_.links[l].elapsed_ns();
      return ns > 0 ? static_cast<double>(n) * bits * 1e3 / static_cast<double>(ns) : 0.0;
    };
    double sld = 0, mld = 0, dsld = 0, dmld = 0;
    int nsld = 0, nmld = 0;
    for (const auto& s : stats_.stations) {
      switch (s.kind) {
      case StationKind::legacy:
        sld += rate(s.c.successes, s.link);
        ++nsld;
        break;
      case StationKind::nonap:
        mld += rate(s.c.successes, s.link);
        ++nmld;
        break;
      case StationKind::ap:
        dsld += rate(s.c.successes_to_sld, s.link) / 2.0;
        dmld += rate(s.c.successes_to_mld, s.link) / 2.0;
        break;
      }
    }
    r.s_u_sld = nsld ? sld / nsld : 0.0;
    r.s_u_mld = nmld ? mld / nmld : 0.0;
    r.s_d_sld = dsld;
    r.s_d_mld = dmld;
    return r;
  }

  ScenarioConfig cfg_;
  SimOptions opt_;
  std::int64_t slot_ns_ = 0, data_ns_ = 0, succ_ns_ = 0, coll_ns_ = 0, total_slots_ = 0;
  double gamma_ = 0;

  std::vector<Sta> sld_[2];
  Sta ap_[2];
  Dest dest_[2];
  std::vector<std::array<Sta, 2>> mld_;
  Exchange ex_[2];
  std::int64_t last_busy_until_[2] = {0, 0};
  SimStats stats_;
};

} // namespace

SimResult run_sim(const ScenarioConfig& cfg, const SimOptions& opt) { return Simulator(cfg, opt).run(); }

} // namespace mlo
