#include "mlo/coupling.hpp"

#include "mlo/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace mlo {
namespace {

// (1 - tau)^n with n clamped at zero, so a population of 0 contributes 1.
double none_of(double tau, int n) { return n <= 0 ? 1.0 : std::pow(1.0 - tau, n); }

void require_taus(const TauSet& t) {
  for (double v : {t.tau_ap_sld, t.tau_ap_mld, t.tau_mld_1, t.tau_mld_2, t.tau_sld_1, t.tau_sld_2})
    if (!(v >= 0.0 && v <= 1.0)) throw ModelError("tau outside [0, 1]");
}

void finish_case(CaseProfile& c, const SlotDurations& dur, const char* name) {
  c.p_c2 = 1.0 - c.p_idle - c.successes() - c.p_c1;
  if (c.p_c2 < -1e-9)
    throw ModelInconsistencyError(std::string(name) + ": event probabilities exceed 1 (residual " +
                                  std::to_string(c.p_c2) + ")");
  c.phi = c.p_idle * dur.t_empty + c.successes() * (dur.t_success + dur.t_empty) +
          (c.p_c1 + c.p_c2) * (dur.t_collision + dur.t_empty);
}

} // namespace

PSet collision_probs(const TauSet& t, int n_mld, int n_sld) {
  require_taus(t);
  PSet p;
  p.p_ap_sld = 1.0 - none_of(t.tau_sld_1, n_sld) * none_of(t.tau_mld_1, n_mld);
  p.p_mld_1 = 1.0 - (1.0 - t.tau_ap_sld) * none_of(t.tau_sld_1, n_sld) * none_of(t.tau_mld_1, n_mld - 1);
  p.p_sld_1 = 1.0 - (1.0 - t.tau_ap_sld) * none_of(t.tau_sld_1, n_sld - 1) * none_of(t.tau_mld_1, n_mld);
  p.p_ap_mld = 1.0 - none_of(t.tau_sld_2, n_sld) * none_of(t.tau_mld_2, n_mld);
  p.p_mld_2 = 1.0 - (1.0 - t.tau_ap_mld) * none_of(t.tau_sld_2, n_sld) * none_of(t.tau_mld_2, n_mld - 1);
  p.p_sld_2 = 1.0 - (1.0 - t.tau_ap_mld) * none_of(t.tau_sld_2, n_sld - 1) * none_of(t.tau_mld_2, n_mld);
  return p;
}

SlotEventProfile event_profile(const TauSet& t, const PSet& p, int n_mld, int n_sld,
                               const SlotDurations& dur, const CouplingOptions& opt) {
  require_taus(t);
  SlotEventProfile e;

  CaseProfile& c1 = e.case1;
  c1.p_idle = (1.0 - t.tau_ap_sld) * none_of(t.tau_sld_1, n_sld) * none_of(t.tau_mld_1, n_mld);
  c1.tau1 = (opt.strict_paper ? t.tau_ap_mld : t.tau_ap_sld) * (1.0 - p.p_ap_sld);
  c1.tau2 = n_sld * t.tau_sld_1 * (1.0 - p.p_sld_1);
  c1.tau3 = n_mld * t.tau_mld_1 * (1.0 - p.p_mld_1);
  c1.p_c1 = t.tau_ap_sld * p.p_ap_sld;
  finish_case(c1, dur, "case 1");

  CaseProfile& c2 = e.case2;
  const double ta = t.tau_ap_mld;
  c2.p_idle = (1.0 - ta) * none_of(t.tau_sld_2, n_sld) * none_of(t.tau_mld_2, n_mld);
  if (n_mld > 0) {
    const double same = ta / n_mld;
    c2.tau1a = (1.0 - same) * ta * (1.0 - p.p_ap_mld);
    c2.tau1b = same * ta * (1.0 - p.p_ap_mld);
  } else {
    c2.tau1a = ta * (1.0 - p.p_ap_mld);
  }
  c2.tau2 = n_sld * t.tau_sld_2 * (1.0 - ta) * none_of(t.tau_sld_2, n_sld - 1) * none_of(t.tau_mld_2, n_mld);
  c2.tau3 = n_mld * t.tau_mld_2 * (1.0 - ta) * none_of(t.tau_sld_2, n_sld) * none_of(t.tau_mld_2, n_mld - 1);
  c2.p_c1 = ta * p.p_ap_mld;
  finish_case(c2, dur, "case 2");
  return e;
}

namespace {

// Own-airtime durations. phi charges every busy event its airtime plus one
// empty slot, so the corrected reading removes both.
struct OwnAirtime {
  double success, collision;
};
OwnAirtime own_airtime(const SlotDurations& dur, bool strict_paper) {
  const double tail = strict_paper ? 0.0 : dur.t_empty;
  return {dur.t_success + tail, dur.t_collision + tail};
}

} // namespace

double phi_busy_ap(const CaseProfile& c, double tau_ap, double p_ap, const SlotDurations& dur, bool strict_paper) {
  const OwnAirtime own = own_airtime(dur, strict_paper);
  return c.phi - c.p_idle * dur.t_empty - tau_ap * (1.0 - p_ap) * own.success - tau_ap * p_ap * own.collision;
}

double phi_busy_mld(const CaseProfile& c, double tau_ap, double tau_mld, double p_mld, double tau_sld,
                    int n_mld, int n_sld, const SlotDurations& dur, bool strict_paper) {
  const OwnAirtime own = own_airtime(dur, strict_paper);
  return c.phi - c.p_idle * dur.t_empty - tau_mld * (1.0 - p_mld) * own.success -
         tau_ap * tau_mld * own.collision -
         (1.0 - tau_ap) * tau_mld * (1.0 - none_of(tau_mld, n_mld - 1) * none_of(tau_sld, n_sld)) *
             own.collision;
}

namespace {

double busy_fraction(double busy, double phi, bool& clamped, const char* name) {
  if (!(phi > 0.0)) throw ModelError(std::string(name) + ": phi must be > 0");
  if (busy < -1e-9 * phi)
    throw ModelInconsistencyError(std::string(name) + ": negative busy time " + std::to_string(busy));
  double f = busy / phi;
  if (f < 0.0 || f > 1.0) {
    spdlog::debug("{} busy fraction {} clamped to [0, 1]", name, f);
    clamped = true;
    f = std::clamp(f, 0.0, 1.0);
  }
  return f;
}

} // namespace

BusyResult busy_probs(const SlotEventProfile& prof, const TauSet& t, const PSet& p, double gamma,
                      int n_mld, int n_sld, const SlotDurations& dur, const CouplingOptions& opt) {
  const bool strict = opt.strict_paper;
  BusyResult r;
  const double ap1 = busy_fraction(phi_busy_ap(prof.case1, t.tau_ap_sld, p.p_ap_sld, dur, strict), prof.case1.phi,
                                   r.clamped, "X_AP case 1");
  const double ap2 = busy_fraction(phi_busy_ap(prof.case2, t.tau_ap_mld, p.p_ap_mld, dur, strict), prof.case2.phi,
                                   r.clamped, "X_AP case 2");
  r.x_ap = (1.0 - gamma) * ap1 + gamma * ap2;
  if (n_mld <= 0) return r;
  const double m1 = busy_fraction(
      phi_busy_mld(prof.case1, t.tau_ap_sld, t.tau_mld_1, p.p_mld_1, t.tau_sld_1, n_mld, n_sld, dur, strict),
      prof.case1.phi, r.clamped, "X_MLD case 1");
  const double m2 = busy_fraction(
      phi_busy_mld(prof.case2, t.tau_ap_mld, t.tau_mld_2, p.p_mld_2, t.tau_sld_2, n_mld, n_sld, dur, strict),
      prof.case2.phi, r.clamped, "X_MLD case 2");
  r.x_mld = (1.0 - gamma) * m1 + gamma * m2;
  return r;
}

double alignment_prob(const NonApChainDistribution<double>& own, double p_idle_own,
                      const NonApChainDistribution<double>& d1, double p_idle_1,
                      const NonApChainDistribution<double>& d2, double p_idle_2, double gamma,
                      const BackoffParams& backoff) {
  const int m = backoff.m;
  auto b_at = [&](const NonApChainDistribution<double>& d, int i, long j) {
    return j < backoff.window(i) ? d.b(i, j) : 0.0;
  };
  // Sibling mixture for counter j over stages [i_lo, m], already weighted by
  // its own survival factor.
  auto sibling = [&](int i_lo, long j) {
    const double q1 = std::pow(p_idle_1, static_cast<double>(j));
    const double q2 = std::pow(p_idle_2, static_cast<double>(j));
    double s = 0.0;
    for (int i = i_lo; i <= m; ++i)
      s += (1.0 - gamma) * b_at(d1, i, j) * q1 + gamma * b_at(d2, i, j) * q2;
    return s;
  };

  double y = 0.0;
  for (int ipp = 0; ipp <= m; ++ipp)
    for (long j = 1; j <= backoff.w0 - 1; ++j)
      y += own.b_dprime(ipp) * std::pow(p_idle_own, static_cast<double>(j)) * sibling(0, j);

  for (int k = 1; k <= m; ++k)
    for (int ipp = k; ipp <= m; ++ipp)
      for (long j = backoff.window(ipp - 1); j <= backoff.window(ipp) - 1; ++j)
        y += own.b_dprime(ipp) * std::pow(p_idle_own, static_cast<double>(j)) * sibling(k, j);

  if (!(y >= -1e-12 && y <= 1.0 + 1e-12))
    throw ModelInconsistencyError("alignment probability outside [0, 1]: " + std::to_string(y));
  return std::clamp(y, 0.0, 1.0);
}

YPair alignment_probs(const NonApChainDistribution<double>& d1, const NonApChainDistribution<double>& d2,
                      double p_idle_1, double p_idle_2, double gamma, const BackoffParams& backoff) {
  return {alignment_prob(d1, p_idle_1, d1, p_idle_1, d2, p_idle_2, gamma, backoff),
          alignment_prob(d2, p_idle_2, d1, p_idle_1, d2, p_idle_2, gamma, backoff)};
}

} // namespace mlo
