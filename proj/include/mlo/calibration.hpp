#pragma once

#include "mlo/params.hpp"
#include "mlo/solver.hpp"

namespace mlo {

/// Anchor values at the N_MLD = N_SLD = 2 point of the joint sweep.
struct CalibrationTarget {
  int n = 2;
  double s_u_sld = 158.4;
  /// Second anchor for n_a; <= 0 disables it and keeps n_a fixed.
  double s_d_sld = 2.2;
  int n_a_max = 256;
};

struct CalibrationResult {
  PhyParams phy;
  ThroughputReport at_anchor;
};

/// Fits the PHY constants the model cannot pin down. r_su is bisected so the
/// legacy uplink throughput at the anchor matches; when the downlink anchor is
/// enabled, n_a is chosen (on integers) as the smallest value whose fitted
/// profile brings the legacy downlink at or below its anchor, then the closer
/// of it and its predecessor is kept.
CalibrationResult calibrate(const ScenarioConfig& base, const CalibrationTarget& target = {},
                            const SolverOptions& opt = {});

/// r_su fit for a fixed n_a.
double fit_r_su(const ScenarioConfig& base, int n, double s_u_sld_target, const SolverOptions& opt = {});

} // namespace mlo
