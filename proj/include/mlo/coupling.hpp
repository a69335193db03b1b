#pragma once

#include "mlo/nonap_chain.hpp"
#include "mlo/params.hpp"

namespace mlo {

/// Case 1: the AP's current frame is for a legacy station. Case 2: for a
/// non-AP MLD. Suffix _1 / _2 follows the case.
struct TauSet {
  double tau_ap_sld = 0;
  double tau_ap_mld = 0;
  double tau_mld_1 = 0;
  double tau_mld_2 = 0;
  double tau_sld_1 = 0;
  double tau_sld_2 = 0;
};

struct PSet {
  double p_ap_sld = 0;
  double p_ap_mld = 0;
  double p_mld_1 = 0;
  double p_mld_2 = 0;
  double p_sld_1 = 0;
  double p_sld_2 = 0;
};

struct CaseProfile {
  double p_idle = 1;
  double tau1 = 0;   ///< case 1 only
  double tau1a = 0;  ///< case 2 only
  double tau1b = 0;  ///< case 2 only
  double tau2 = 0;
  double tau3 = 0;
  double p_c1 = 0;
  double p_c2 = 0;
  double phi = 0;    ///< expected slot duration, us

  double successes() const { return tau1 + tau1a + tau1b + tau2 + tau3; }
};

struct SlotEventProfile {
  CaseProfile case1;
  CaseProfile case2;
};

struct BusyAlign {
  double x_ap = 0;
  double x_mld = 0;
  double y_case1 = 0;
  double y_case2 = 0;
};

struct BusyResult {
  double x_ap = 0;
  double x_mld = 0;
  bool clamped = false;
};

struct CouplingOptions {
  /// Use the literal printed forms: tau_1^I = tau_AP^MLD (1 - p_AP^SLD)
  /// instead of the SLO-part transmit probability, and bare own airtime in
  /// phi_busy.
  bool strict_paper = false;
};

PSet collision_probs(const TauSet& t, int n_mld, int n_sld);

SlotEventProfile event_profile(const TauSet& t, const PSet& p, int n_mld, int n_sld,
                               const SlotDurations& dur, const CouplingOptions& opt = {});

/// phi_busy of the AP (resp. a tagged non-AP MLD): the share of a slot during
/// which the link is occupied by someone else. strict_paper subtracts only
/// the bare airtime of the device's own events, leaving their trailing empty
/// slot counted as busy.
double phi_busy_ap(const CaseProfile& c, double tau_ap, double p_ap, const SlotDurations& dur,
                   bool strict_paper = false);
double phi_busy_mld(const CaseProfile& c, double tau_ap, double tau_mld, double p_mld, double tau_sld,
                    int n_mld, int n_sld, const SlotDurations& dur, bool strict_paper = false);

BusyResult busy_probs(const SlotEventProfile& prof, const TauSet& t, const PSet& p, double gamma,
                      int n_mld, int n_sld, const SlotDurations& dur, const CouplingOptions& opt = {});

/// Y for a link whose own case distribution is `own`, against the sibling's
/// case mixture. b_{i,j} reads as zero for j >= W_i.
double alignment_prob(const NonApChainDistribution<double>& own, double p_idle_own,
                      const NonApChainDistribution<double>& d1, double p_idle_1,
                      const NonApChainDistribution<double>& d2, double p_idle_2, double gamma,
                      const BackoffParams& backoff);

struct YPair {
  double y_case1 = 0;
  double y_case2 = 0;
};

YPair alignment_probs(const NonApChainDistribution<double>& d1, const NonApChainDistribution<double>& d2,
                      double p_idle_1, double p_idle_2, double gamma, const BackoffParams& backoff);

} // namespace mlo
