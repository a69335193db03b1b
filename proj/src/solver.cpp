#include "mlo/solver.hpp"

#include "mlo/ap_chain.hpp"
#include "mlo/errors.hpp"
#include "mlo/legacy_model.hpp"
#include "mlo/nonap_chain.hpp"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>

namespace mlo {
namespace {

constexpr double kXMax = 1.0 - 1e-9;

TauSet taus_of(const StateVector& x) {
  return {x[kTauApSld], x[kTauApMld], x[kTauMld1], x[kTauMld2], x[kTauSld1], x[kTauSld2]};
}

void project(const ScenarioConfig& cfg, StateVector& x) {
  for (int i = 0; i < kStateSize; ++i) x[i] = std::clamp(x[i], 0.0, 1.0);
  x[kXAp] = std::min(x[kXAp], kXMax);
  x[kXMld] = std::min(x[kXMld], kXMax);
  if (cfg.n_mld == 0) x[kTauMld1] = x[kTauMld2] = x[kXMld] = x[kY1] = x[kY2] = 0.0;
  if (cfg.n_sld == 0) x[kTauSld1] = x[kTauSld2] = 0.0;
}

} // namespace

StateVector initial_state(const ScenarioConfig& cfg) {
  StateVector x;
  const double t0 = 2.0 / (cfg.backoff.w0 + 1);
  x << t0, t0, t0, t0, t0, t0, 0.1, 0.1, 0.1, 0.1;
  project(cfg, x);
  return x;
}

StateVector fixed_point_map(const ScenarioConfig& cfg, const StateVector& x, const SolverOptions& opt,
                            CouplingState* out) {
  const BackoffParams& bo = cfg.backoff;
  const double gamma = cfg.effective_gamma();
  const int nm = cfg.n_mld, ns = cfg.n_sld;
  const TauSet t = taus_of(x);
  const PSet p = collision_probs(t, nm, ns);
  const SlotDurations dur = compute_slot_durations(cfg.phy);

  StateVector f = StateVector::Zero();
  if (ns > 0) {
    f[kTauSld1] = sld_tau(p.p_sld_1, bo.cw_min_sld, bo.m);
    f[kTauSld2] = sld_tau(p.p_sld_2, bo.cw_min_sld, bo.m);
  }
  const auto ap = ap_tau(ApChainInputs<double>{p.p_ap_mld, p.p_ap_sld, x[kXAp], gamma, bo});
  f[kTauApSld] = ap.tau_ap_sld;
  f[kTauApMld] = ap.tau_ap_mld;

  const CouplingOptions copt{opt.strict_paper};
  const SlotEventProfile prof = event_profile(t, p, nm, ns, dur, copt);
  const BusyResult busy = busy_probs(prof, t, p, gamma, nm, ns, dur, copt);
  f[kXAp] = busy.x_ap;

  if (nm > 0) {
    f[kTauMld1] = nonap_tau_selfconsistent(p.p_mld_1, x[kXMld], x[kY1], bo);
    f[kTauMld2] = nonap_tau_selfconsistent(p.p_mld_2, x[kXMld], x[kY2], bo);
    f[kXMld] = busy.x_mld;
    const auto d1 = nonap_stationary(NonApChainInputs<double>{p.p_mld_1, x[kXMld], x[kY1], x[kTauMld1], bo});
    const auto d2 = nonap_stationary(NonApChainInputs<double>{p.p_mld_2, x[kXMld], x[kY2], x[kTauMld2], bo});
    const YPair y = alignment_probs(d1, d2, prof.case1.p_idle, prof.case2.p_idle, gamma, bo);
    f[kY1] = y.y_case1;
    f[kY2] = y.y_case2;
  }

  if (out) {
    out->taus = t;
    out->ps = p;
    out->profile = prof;
    out->busy = {x[kXAp], x[kXMld], x[kY1], x[kY2]};
    out->clamped = busy.clamped;
  }
  return f;
}

CouplingState solve_fixed_point(const ScenarioConfig& cfg, const SolverOptions& opt) {
  cfg.validate();
  if (!(opt.alpha > 0.0 && opt.alpha <= 1.0)) throw ModelError("solver alpha must be in (0, 1]");

  StateVector x = initial_state(cfg);
  double alpha = opt.alpha;
  int halvings = 0;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  double resid = 0.0;

  // Anderson history: residuals g_k = F(x_k) - x_k and iterates F(x_k).
  std::deque<StateVector> hist_g, hist_f;
  // plain damped step taken instead when an extrapolated point leaves the model's domain
  std::optional<StateVector> fallback;

  for (int it = 1; it <= opt.max_iters; ++it) {
    StateVector f;
    try {
      f = fixed_point_map(cfg, x, opt);
    } catch (const ModelError&) {
      if (!fallback) throw;
      x = *fallback;
      fallback.reset();
      hist_g.clear();
      hist_f.clear();
      continue;
    }
    const StateVector g = f - x;
    resid = g.cwiseAbs().maxCoeff();
    if (!std::isfinite(resid)) throw SolverError("fixed point produced a non-finite value", resid);

    if (resid < opt.tol) {
      CouplingState s;
      fixed_point_map(cfg, x, opt, &s);
      s.residual_norm = resid;
      s.iterations = it;
      s.alpha = alpha;
      spdlog::debug("fixed point converged in {} iterations (residual {:.3e})", it, resid);
      return s;
    }

    if (resid < best * (1.0 - 1e-6)) {
      best = resid;
      since_best = 0;
    } else if (++since_best > opt.stall_window) {
      if (halvings >= opt.max_halvings)
        throw SolverError("fixed point oscillates after " + std::to_string(halvings) + " damping halvings",
                          resid);
      alpha *= 0.5;
      ++halvings;
      since_best = 0;
      best = resid;
      hist_g.clear();
      hist_f.clear();
      spdlog::debug("fixed point stalled at iteration {}; damping now {}", it, alpha);
    }

    StateVector next = (1.0 - alpha) * x + alpha * f;
    fallback.reset();
    if (opt.anderson) {
      hist_g.push_back(g);
      hist_f.push_back(f);
      if (static_cast<int>(hist_g.size()) > opt.anderson_depth + 1) {
        hist_g.pop_front();
        hist_f.pop_front();
      }
      const int k = static_cast<int>(hist_g.size()) - 1;
      if (k >= 1) {
        Eigen::MatrixXd dG(kStateSize, k), dF(kStateSize, k);
        for (int j = 0; j < k; ++j) {
          dG.col(j) = hist_g[j + 1] - hist_g[j];
          dF.col(j) = hist_f[j + 1] - hist_f[j];
        }
        const Eigen::VectorXd gam = dG.colPivHouseholderQr().solve(g);
        // damped Anderson step: (x - dX gam) + alpha (g - dG gam), with dX = dF - dG
        const StateVector cand = (x - (dF - dG) * gam) + alpha * (g - dG * gam);
        if (cand.allFinite()) {
          project(cfg, next);
          fallback = next;
          next = cand;
        }
      }
    }
    project(cfg, next);
    x = next;
  }
  throw SolverError("fixed point did not converge in " + std::to_string(opt.max_iters) + " iterations", resid);
}

ThroughputReport throughput(const ScenarioConfig& cfg, const CouplingState& s, const NthModel& nth,
                            bool strict_paper) {
  const double gamma = cfg.effective_gamma();
  const double bits = cfg.phy.payload_bits();
  const SlotDurations dur = compute_slot_durations(cfg.phy);
  const CaseProfile& c1 = s.profile.case1;
  const CaseProfile& c2 = s.profile.case2;

  ThroughputReport r;
  r.scenario = cfg;
  r.source = ThroughputReport::Source::analytical;
  r.iterations = s.iterations;
  r.residual = s.residual_norm;
  r.nth_model = nth.describe();

  if (cfg.n_sld > 0)
    r.s_u_sld = ((1.0 - gamma) * c1.tau2 / c1.phi + gamma * c2.tau2 / c2.phi) * bits / cfg.n_sld;
  if (cfg.n_mld > 0) {
    const double n1 = nth(s.ps.p_mld_1), n2 = nth(s.ps.p_mld_2);
    r.s_u_mld = ((1.0 - gamma) * c1.tau3 / c1.phi * std::pow(1.0 - s.ps.p_mld_1, n1) +
                 gamma * c2.tau3 / c2.phi * std::pow(1.0 - s.ps.p_mld_2, n2)) *
                bits / cfg.n_mld;
  }
  r.s_d_sld = c1.tau1 / c1.phi * bits;
  if (cfg.n_mld > 0 && gamma > 0) {
    const double na = nth(s.ps.p_ap_mld);
    const double align = std::max(0.0, 1.0 - na * dur.t_empty / dur.t_data);
    const double first = c2.tau1a / (strict_paper ? c1.phi : c2.phi);
    r.s_d_mld = (first + c2.tau1b / c2.phi * align * std::pow(1.0 - s.ps.p_ap_mld, na)) * bits;
  }
  return r;
}

ThroughputReport analyze(const ScenarioConfig& cfg, const SolverOptions& opt) {
  const CouplingState s = solve_fixed_point(cfg, opt);
  return throughput(cfg, s, NthModel::enumerated(cfg.backoff), opt.strict_paper);
}

} // namespace mlo
