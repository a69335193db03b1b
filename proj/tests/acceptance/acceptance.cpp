// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "mlo/ap_chain.hpp"
#include "mlo/calibration.hpp"
#include "mlo/cli.hpp"
#include "mlo/config.hpp"
#include "mlo/nonap_chain.hpp"
#include "mlo/sim.hpp"
#include "mlo/solver.hpp"
#include "mlo/trace.hpp"
#include "oracles.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace mlo;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

std::uint64_t g_nstr = 0;
std::uint64_t g_align = 0;
std::uint64_t g_runs = 0;

SimResult tracked_sim(const ScenarioConfig& c, const SimOptions& o) {
  SimResult r = run_sim(c, o);
  g_nstr += r.stats.nstr_violations;
  g_align += r.stats.alignment_violations;
  ++g_runs;
  return r;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ApChainInputs<double> ap_inputs(double pm, double ps, double x, double g, int w0, int m) {
  ApChainInputs<double> in;
  in.p_ap_mld = pm;
  in.p_ap_sld = ps;
  in.x_ap = x;
  in.gamma = g;
  in.backoff.w0 = w0;
  in.backoff.m = m;
  return in;
}

NonApChainInputs<double> nonap_inputs(double p, double x, double y, double tau, int w0, int m) {
  NonApChainInputs<double> in;
  in.p_mld = p;
  in.x_mld = x;
  in.y = y;
  in.tau_mld_prev = tau;
  in.backoff.w0 = w0;
  in.backoff.m = m;
  return in;
}

template <class M>
bool all_in_unit(const M& m) {
  return m.size() == 0 || (m.minCoeff() >= 0.0 && m.maxCoeff() <= 1.0);
}

Outcome c1_normalization() {
  const auto t0 = Clock::now();
  boost::random::mt19937_64 rng(2024);
  boost::random::uniform_real_distribution<double> u(0.0, 0.95);
  boost::random::uniform_int_distribution<int> wexp(1, 5), mm(1, 7);
  double worst = 0;
  int bad_range = 0;
  for (int n = 0; n < 100; ++n) {
    const int w0 = 1 << wexp(rng), m = mm(rng);
    const auto a = ap_stationary(ap_inputs(u(rng), u(rng), u(rng), u(rng) / 0.95, w0, m));
    const auto b = nonap_stationary(nonap_inputs(u(rng), u(rng), u(rng) / 0.95, 0.01 + u(rng) / 0.95 * 0.98, w0, m));
    worst = std::max({worst, std::abs(a.total() - 1.0), std::abs(b.total() - 1.0)});
    if (!all_in_unit(a.b_mld) || !all_in_unit(a.b_sld) || !all_in_unit(a.b_mld_prime) || !all_in_unit(b.b) ||
        !all_in_unit(b.b_prime) || !all_in_unit(b.b_dprime))
      ++bad_range;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && bad_range == 0 && secs < 5.0,
          fmt::format("max |sum - 1| = {:.2e}, out-of-range grids = {}, {:.2f} s", worst, bad_range, secs)};
}

Outcome c2_oracle() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (int w0 : {4, 8, 16})
    for (int m : {1, 2, 3}) {
      const double pm = 0.22, ps = 0.31, x = 0.27, g = 0.4;
      const auto a = ap_stationary(ap_inputs(pm, ps, x, g, w0, m));
      const auto oa = oracle::ap_chain(pm, ps, x, g, w0, m);
      const double p = 0.2, xm = 0.35, y = 0.45, tau = 0.06;
      const auto b = nonap_stationary(nonap_inputs(p, xm, y, tau, w0, m));
      const auto ob = oracle::nonap_chain(p, xm, y, tau, w0, m);
      for (int i = 0; i <= m; ++i) {
        for (long k = 0; k < (static_cast<long>(w0) << i); ++k) {
          worst = std::max(worst, std::abs(a.b_mld(i, k) - oa.b_mld(i, k)));
          worst = std::max(worst, std::abs(a.b_sld(i, k) - oa.b_sld(i, k)));
          worst = std::max(worst, std::abs(b.b(i, k) - ob.b(i, k)));
        }
        worst = std::max(worst, std::abs(a.b_mld_prime(i) - oa.prime(i)));
        worst = std::max(worst, std::abs(b.b_prime(i) - ob.prime(i)));
        worst = std::max(worst, std::abs(b.b_dprime(i) - ob.dprime(i)));
      }
    }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 30.0, fmt::format("max entry difference {:.2e}, {:.2f} s", worst, secs)};
}

Outcome c3_bianchi_analysis() {
  double worst = 0;
  for (int n : {1, 2, 5, 10}) {
    ScenarioConfig c;
    c.n_mld = 0;
    c.n_sld = n;
    c.gamma = 0.0;
    const CouplingState s = solve_fixed_point(c);
    const oracle::Bianchi b = oracle::bianchi_solve(n + 1, 16, 6);
    worst = std::max({worst, std::abs(s.taus.tau_sld_1 - b.tau), std::abs(s.ps.p_sld_1 - b.p)});
  }
  return {worst <= 1e-6, fmt::format("max |d tau|, |d p| = {:.2e}", worst)};
}

Outcome c4_bianchi_sim() {
  const auto t0 = Clock::now();
  double worst_p = 0, worst_s = 0;
  for (int n : {2, 5, 10}) {
    // AP as one more plain legacy contender on each link
    ScenarioConfig c;
    c.n_mld = 0;
    c.n_sld = n - 1;
    c.gamma = 0.0;
    SimOptions o;
    o.duration_s = 10.0;
    o.seed = 100 + static_cast<std::uint64_t>(n);
    o.ap_restart_any_destination = false;
    o.trace_limit = 0;
    const SimResult r = tracked_sim(c, o);
    const oracle::Bianchi b = oracle::bianchi_solve(n, 16, 6);
    const SlotDurations d = compute_slot_durations(c.phy);
    const double s_ref = oracle::bianchi_throughput(b, n, c.phy.payload_bits(), d.t_success, d.t_collision, d.t_empty);
    for (int l = 0; l < 2; ++l) {
      std::uint64_t succ = 0;
      for (const auto& s : r.stats.stations) {
        if (s.link != l) continue;
        succ += s.c.successes;
        if (s.c.attempts)
          worst_p = std::max(worst_p, std::abs(static_cast<double>(s.c.collisions) / s.c.attempts - b.p));
      }
      const double agg = static_cast<double>(succ) * c.phy.payload_bits() * 1e3 /
                         static_cast<double>(r.stats.links[l].elapsed_ns());
      worst_s = std::max(worst_s, std::abs(agg - s_ref) / s_ref);
    }
  }
  const double secs = seconds_since(t0);
  return {worst_p <= 0.02 && worst_s <= 0.05 && secs < 120.0,
          fmt::format("max |p_sim - p| = {:.4f}, max throughput error {:.2f}%, {:.1f} s", worst_p, 100 * worst_s,
                      secs)};
}

const std::array<double, 6> kSldUl{158.4, 102.2, 74.3, 57.8, 47.1, 39.6};

struct Calibrated {
  ScenarioConfig base;
  std::vector<ThroughputReport> sweep;
};

const Calibrated& calibrated() {
  static const Calibrated c = [] {
    Calibrated r;
    r.base = ScenarioConfig{};
    r.base.phy = calibrate(r.base).phy;
    for (int n = 2; n <= 7; ++n) {
      ScenarioConfig s = r.base;
      s.n_mld = s.n_sld = n;
      r.sweep.push_back(analyze(s));
    }
    return r;
  }();
  return c;
}

Outcome c5_trend() {
  const auto& c = calibrated();
  bool dec = true, within = true;
  std::string vals;
  for (std::size_t i = 0; i < c.sweep.size(); ++i) {
    const double v = c.sweep[i].s_u_sld;
    if (i && !(v < c.sweep[i - 1].s_u_sld)) dec = false;
    if (std::abs(v - kSldUl[i]) > 0.10 * kSldUl[i]) within = false;
    vals += fmt::format("{}{:.1f}", i ? " " : "", v);
  }
  return {dec && within, fmt::format("n_a = {}, r_su = {:.1f}; s_u_sld = [{}] (decreasing: {})", c.base.phy.n_a,
                                     c.base.phy.r_su, vals, dec ? "yes" : "no")};
}

Outcome c6_near_zero() {
  const auto& c = calibrated();
  bool ok = true;
  double max_mld = 0;
  std::string dsld, dmld;
  for (std::size_t i = 0; i < c.sweep.size(); ++i) {
    const auto& r = c.sweep[i];
    max_mld = std::max(max_mld, r.s_u_mld);
    if (r.s_u_mld > 0.005) ok = false;
    if (!(r.s_d_sld < 3.0 && r.s_d_mld < 3.0)) ok = false;
    if (i && !(r.s_d_sld < c.sweep[i - 1].s_d_sld && r.s_d_mld < c.sweep[i - 1].s_d_mld)) ok = false;
    // ">>" read as at least a factor of ten
    if (!(r.s_u_sld >= 10 * r.s_d_sld && r.s_d_sld > r.s_d_mld && r.s_d_mld >= 10 * r.s_u_mld)) ok = false;
    dsld += fmt::format("{}{:.3f}", i ? " " : "", r.s_d_sld);
    dmld += fmt::format("{}{:.3f}", i ? " " : "", r.s_d_mld);
  }
  return {ok, fmt::format("max s_u_mld = {:.2e}; s_d_sld = [{}]; s_d_mld = [{}]", max_mld, dsld, dmld)};
}

Outcome c7_agreement() {
  const auto t0 = Clock::now();
  const auto& c = calibrated();
  SweepSpec sw = parse_sweep("joint=2..7");
  sw.engines = SweepSpec::Engines::both;
  sw.repetitions = 3;
  SimOptions o;
  o.duration_s = 5.0;
  o.seed = 1;
  o.trace_limit = 0;
  const auto rows = run_sweep(c.base, sw, SolverOptions{}, o, 1);
  bool ok = true;
  std::string errs, mld;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    g_nstr += r.nstr_violations;
    g_runs += static_cast<std::uint64_t>(sw.repetitions);
    const double e = 100.0 * std::abs((*r.sim)[0].mean - r.analysis->s_u_sld) / r.analysis->s_u_sld;
    if (e > 15.0) ok = false;
    if ((*r.sim)[1].mean > 0.01) ok = false;
    errs += fmt::format("{}{:.1f}", i ? " " : "", e);
    mld += fmt::format("{}{:.3f}", i ? " " : "", (*r.sim)[1].mean);
  }
  const double secs = seconds_since(t0);
  if (secs > 600.0) ok = false;
  return {ok, fmt::format("SLD UL error % = [{}]; sim MLD UL Mbps = [{}]; {:.1f} s", errs, mld, secs)};
}

std::string stats_csv(const SimStats& s) {
  std::ostringstream out;
  write_station_csv(out, s);
  write_link_csv(out, s);
  write_trace_csv(out, s);
  return out.str();
}

Outcome c9_determinism() {
  int mismatches = 0, runs = 0;
  for (int n : {2, 5}) {
    ScenarioConfig c;
    c.n_mld = c.n_sld = n;
    for (std::uint64_t seed : {1u, 42u}) {
      SimOptions o;
      o.duration_s = 1.0;
      o.seed = seed;
      if (stats_csv(tracked_sim(c, o).stats) != stats_csv(tracked_sim(c, o).stats)) ++mismatches;
      ++runs;
    }
  }
  return {mismatches == 0, fmt::format("{} of {} repeated runs differ", mismatches, runs)};
}

Outcome c8_nstr() {
  // also exercise the remaining simulator options
  ScenarioConfig c;
  c.n_mld = c.n_sld = 4;
  for (bool permissive : {false, true}) {
    SimOptions o;
    o.duration_s = 2.0;
    o.permissive_wait = permissive;
    tracked_sim(c, o);
  }
  return {g_nstr == 0, fmt::format("{} violations over {} runs (alignment violations {})", g_nstr, g_runs, g_align)};
}

} // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 chain normalization", c1_normalization},
      {"2 chain oracle equivalence", c2_oracle},
      {"3 Bianchi reduction (analysis)", c3_bianchi_analysis},
      {"4 Bianchi reduction (simulation)", c4_bianchi_sim},
      {"5 legacy uplink trend after calibration", c5_trend},
      {"6 near-zero classes", c6_near_zero},
      {"7 analysis vs simulation", c7_agreement},
      {"9 simulator determinism", c9_determinism},
      {"8 NSTR safety invariant", c8_nstr},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    fmt::print("{} criterion {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
