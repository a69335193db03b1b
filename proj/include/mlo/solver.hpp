#pragma once

#include "mlo/coupling.hpp"
#include "mlo/nth_model.hpp"
#include "mlo/params.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace mlo {

struct SolverOptions {
  double alpha = 0.3;
  double tol = 1e-8;
  int max_iters = 50000;
  int max_halvings = 4;
  /// Iterations without a new best residual before alpha is halved.
  int stall_window = 400;
  bool anderson = false;
  int anderson_depth = 5;
  bool strict_paper = false;
};

struct CouplingState {
  TauSet taus;
  PSet ps;
  BusyAlign busy;
  SlotEventProfile profile;
  double residual_norm = 0;
  int iterations = 0;
  double alpha = 0;
  bool clamped = false;
};

/// Unknown vector layout used by the fixed-point map.
enum StateIndex : int {
  kTauApSld, kTauApMld, kTauMld1, kTauMld2, kTauSld1, kTauSld2, kXAp, kXMld, kY1, kY2, kStateSize
};
using StateVector = Eigen::Matrix<double, kStateSize, 1>;

StateVector initial_state(const ScenarioConfig& cfg);
/// One application of the full model pipeline. `out`, when given, receives
/// the derived quantities evaluated at x.
StateVector fixed_point_map(const ScenarioConfig& cfg, const StateVector& x, const SolverOptions& opt,
                            CouplingState* out = nullptr);

CouplingState solve_fixed_point(const ScenarioConfig& cfg, const SolverOptions& opt = {});

struct ThroughputReport {
  enum class Source { analytical, simulated };

  double s_u_sld = 0;
  double s_u_mld = 0;
  double s_d_sld = 0;
  double s_d_mld = 0;
  ScenarioConfig scenario;
  Source source = Source::analytical;
  int iterations = 0;
  double residual = 0;
  std::string nth_model;
};

ThroughputReport throughput(const ScenarioConfig& cfg, const CouplingState& s, const NthModel& nth,
                            bool strict_paper = false);

/// Convenience: solve and evaluate with the enumerated N_th table.
ThroughputReport analyze(const ScenarioConfig& cfg, const SolverOptions& opt = {});

} // namespace mlo
