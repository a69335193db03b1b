#include "mlo/calibration.hpp"

#include "mlo/errors.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace mlo {
namespace {

// s_u_sld and s_d_sld do not involve N_th, so a constant model is enough here.
ThroughputReport quick(const ScenarioConfig& cfg, const SolverOptions& opt) {
  return throughput(cfg, solve_fixed_point(cfg, opt), NthModel::constant(0.0), opt.strict_paper);
}

ScenarioConfig at_point(const ScenarioConfig& base, int n) {
  ScenarioConfig c = base;
  c.n_mld = n;
  c.n_sld = n;
  return c;
}

} // namespace

double fit_r_su(const ScenarioConfig& base, int n, double target, const SolverOptions& opt) {
  ScenarioConfig c = at_point(base, n);
  auto eval = [&](double r) {
    c.phy.r_su = r;
    return quick(c, opt).s_u_sld;
  };
  double lo = 50.0, hi = 2.0e5;
  if (eval(hi) < target) throw ModelError("calibration: target legacy uplink throughput is unreachable");
  if (eval(lo) > target) throw ModelError("calibration: target legacy uplink throughput is too low");
  // t_data rounds up to whole symbols, so the throughput is a step function of r_su
  while (hi - lo > 1e-4 * hi) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid) < target ? lo : hi) = mid;
  }
  return std::abs(eval(lo) - target) <= std::abs(eval(hi) - target) ? lo : hi;
}

CalibrationResult calibrate(const ScenarioConfig& base, const CalibrationTarget& target, const SolverOptions& opt) {
  auto fitted = [&](int n_a) {
    ScenarioConfig c = at_point(base, target.n);
    c.phy.n_a = n_a;
    c.phy.r_su = fit_r_su(c, target.n, target.s_u_sld, opt);
    return c;
  };
  auto downlink = [&](const ScenarioConfig& c) { return quick(c, opt).s_d_sld; };
  // Small aggregates cannot reach the uplink anchor at any rate; those count as "go larger".
  auto too_small = [&](int n_a) {
    try {
      return downlink(fitted(n_a)) > target.s_d_sld;
    } catch (const ModelError&) {
      return true;
    }
  };

  if (target.s_d_sld <= 0.0) {
    const ScenarioConfig best = fitted(base.phy.n_a);
    spdlog::info("calibrated n_a = {}, r_su = {:.3f}", best.phy.n_a, best.phy.r_su);
    return {best.phy, analyze(best, opt)};
  }
  int lo = 1, hi = target.n_a_max;
  if (too_small(hi)) {
    lo = hi;
  } else {
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (too_small(mid) ? lo : hi) = mid;
    }
  }
  ScenarioConfig best = fitted(hi);
  if (lo != hi) {
    try {
      const ScenarioConfig a = fitted(lo);
      if (std::abs(downlink(a) - target.s_d_sld) <= std::abs(downlink(best) - target.s_d_sld)) best = a;
    } catch (const ModelError&) {
    }
  }
  spdlog::info("calibrated n_a = {}, r_su = {:.3f}", best.phy.n_a, best.phy.r_su);
  CalibrationResult r;
  r.phy = best.phy;
  r.at_anchor = analyze(best, opt);
  return r;
}

} // namespace mlo
