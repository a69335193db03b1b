#pragma once

#include "mlo/ap_chain.hpp"
#include "mlo/errors.hpp"
#include "mlo/params.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace mlo {

template <typename Scalar>
struct NonApChainInputs {
  Scalar p_mld = 0;
  Scalar x_mld = 0;
  Scalar y = 1;
  Scalar tau_mld_prev = 0;
  BackoffParams backoff;
};

template <typename Scalar>
struct NonApChainDistribution {
  using Table = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Table b;        ///< (i, k), zero for k >= W_i
  Vec b_prime;    ///< restart states (i', 0)
  Vec b_dprime;   ///< wait states (i'', 0)
  Scalar lambda3 = 0;

  Scalar total() const { return b.sum() + b_prime.sum() + b_dprime.sum(); }
};

namespace detail {

template <typename Scalar>
struct NonApAggregates {
  Scalar rx, l3, z, b00;
};

template <typename Scalar>
NonApAggregates<Scalar> nonap_aggregates(const NonApChainInputs<Scalar>& in) {
  in.backoff.validate();
  check_prob(in.p_mld, "p_mld", true);
  check_prob(in.x_mld, "x_mld", true);
  check_prob(in.y, "y", false);
  check_prob(in.tau_mld_prev, "tau_mld_prev", false);

  const Scalar one(1);
  const Scalar X = in.x_mld;
  const Scalar tau = in.tau_mld_prev;
  const Scalar D = one - (one - tau) * (one - in.y);
  if (!(D > Scalar(0))) throw SingularModelError("nonap chain: 1 - (1-tau)(1-Y) must be > 0");

  NonApAggregates<Scalar> a;
  a.z = (one - tau) / D;
  a.rx = X / (one - X);
  a.l3 = (one - tau) * (one - in.y) / (D * (one - X));

  const int m = in.backoff.m;
  const auto s = stage_weights(in.p_mld, m);
  Scalar C(0);
  for (int i = 0; i <= m; ++i) {
    const Scalar W = Scalar(in.backoff.window(i));
    C += s(i) * (one + (W - 1) / 2 + W / 2 * (a.rx + a.l3) + a.rx * W / (W - 1) + a.l3 / (W - 1) +
                 X * a.l3 + a.z);
  }
  a.b00 = one / C;
  return a;
}

} // namespace detail

template <typename Scalar>
NonApChainDistribution<Scalar> nonap_stationary(const NonApChainInputs<Scalar>& in) {
  const auto a = detail::nonap_aggregates(in);
  const Scalar one(1);
  const Scalar X = in.x_mld;
  const Scalar rx = a.rx, l3 = a.l3, z = a.z, b00 = a.b00;
  const int m = in.backoff.m;
  const auto s = detail::stage_weights(in.p_mld, m);

  NonApChainDistribution<Scalar> d;
  d.lambda3 = l3;
  d.b = NonApChainDistribution<Scalar>::Table::Zero(m + 1, in.backoff.window(m));
  d.b_prime = NonApChainDistribution<Scalar>::Vec::Zero(m + 1);
  d.b_dprime = NonApChainDistribution<Scalar>::Vec::Zero(m + 1);
  for (int i = 0; i <= m; ++i) {
    const long Wi = in.backoff.window(i);
    const Scalar W = Scalar(Wi);
    const Scalar bi0 = s(i) * b00;
    const Scalar boost = one + W / (W - 1) * (rx + l3);
    d.b(i, 0) = bi0;
    for (long k = 1; k < Wi; ++k) d.b(i, k) = (W - Scalar(k)) / W * boost * bi0;
    d.b_prime(i) = (rx * W / (W - 1) + l3 / (W - 1) + X * l3) * bi0;
    d.b_dprime(i) = z * bi0;
  }
  return d;
}

template <typename Scalar>
Scalar nonap_tau(const NonApChainDistribution<Scalar>& d, Scalar p_mld) {
  return d.b(0, 0) / (Scalar(1) - p_mld);
}

template <typename Scalar>
Scalar nonap_tau(const NonApChainInputs<Scalar>& in) {
  return detail::nonap_aggregates(in).b00 / (Scalar(1) - in.p_mld);
}

struct SelfConsistentOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iters = 10000;
};

/// tau* with tau* = nonap_tau(..., tau_mld_prev = tau*).
template <typename Scalar>
Scalar nonap_tau_selfconsistent(Scalar p_mld, Scalar x_mld, Scalar y, const BackoffParams& backoff,
                                const SelfConsistentOptions& opt = {}) {
  NonApChainInputs<Scalar> in{p_mld, x_mld, y, Scalar(2) / Scalar(backoff.w0 + 1), backoff};
  Scalar resid(0);
  for (int it = 0; it < opt.max_iters; ++it) {
    const Scalar f = nonap_tau(in);
    resid = std::abs(f - in.tau_mld_prev);
    if (resid < Scalar(opt.tol)) {
      // land on an exact re-evaluation so the returned value satisfies the contract
      in.tau_mld_prev = f;
      const Scalar f2 = nonap_tau(in);
      if (std::abs(f2 - f) < Scalar(opt.tol)) return f;
    }
    in.tau_mld_prev = (Scalar(1) - Scalar(opt.damping)) * in.tau_mld_prev + Scalar(opt.damping) * f;
  }
  throw SolverError("nonap_tau_selfconsistent: no convergence after " + std::to_string(opt.max_iters) +
                        " iterations",
                    static_cast<double>(resid));
}

} // namespace mlo
