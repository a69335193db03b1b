#pragma once

#include "mlo/errors.hpp"
#include "mlo/params.hpp"

#include <Eigen/Core>

#include <cmath>

namespace mlo {

template <typename Scalar>
struct ApChainInputs {
  Scalar p_ap_mld = 0;
  Scalar p_ap_sld = 0;
  Scalar x_ap = 0;
  Scalar gamma = 0.5;
  BackoffParams backoff;
};

/// Rows are stages 0..m, columns counters 0..W_m-1. Entries with k >= W_i
/// are structurally zero.
template <typename Scalar>
struct ApChainDistribution {
  using Table = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Table b_mld;
  Table b_sld;
  Vec b_mld_prime;
  Scalar lambda1 = 0;
  Scalar lambda2 = 0;

  Scalar total() const { return b_mld.sum() + b_sld.sum() + b_mld_prime.sum(); }
};

namespace detail {

/// Stage weights s_i: b_{i,0} = s_i * b_{0,0}.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> stage_weights(Scalar p, int m) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> s(m + 1);
  Scalar pw(1);
  for (int i = 0; i < m; ++i) {
    s(i) = pw;
    pw *= p;
  }
  s(m) = pw / (Scalar(1) - p);
  return s;
}

template <typename Scalar>
void check_prob(Scalar v, const char* name, bool open_top) {
  using std::isfinite;
  if (!isfinite(v) || v < Scalar(0) || v > Scalar(1))
    throw ModelError(std::string(name) + " must be in [0, 1]");
  if (open_top && v >= Scalar(1))
    throw SingularModelError(std::string(name) + " must be < 1");
}

} // namespace detail

template <typename Scalar>
ApChainDistribution<Scalar> ap_stationary(const ApChainInputs<Scalar>& in) {
  in.backoff.validate();
  detail::check_prob(in.p_ap_mld, "p_ap_mld", true);
  detail::check_prob(in.p_ap_sld, "p_ap_sld", true);
  detail::check_prob(in.x_ap, "x_ap", true);
  detail::check_prob(in.gamma, "gamma", false);

  const int m = in.backoff.m;
  const long wmax = in.backoff.window(m);
  const Scalar X = in.x_ap;
  const Scalar g = in.gamma;
  const Scalar rx = X / (Scalar(1) - X);
  const auto s_mld = detail::stage_weights(in.p_ap_mld, m);
  const auto s_sld = detail::stage_weights(in.p_ap_sld, m);

  ApChainDistribution<Scalar> d;
  d.lambda1 = Scalar(1) / (Scalar(1) - in.p_ap_mld);
  d.lambda2 = 0;
  for (int i = 0; i <= m; ++i) {
    const Scalar W = Scalar(in.backoff.window(i));
    d.lambda1 += s_mld(i) * ((W - 1) / 2 + rx * (W / 2 + W / (W - 1)));
    d.lambda2 += s_sld(i) * (W + 1) / 2;
  }

  Scalar b_mld00, b_sld00;
  if (g <= Scalar(0)) {
    b_mld00 = 0;
    b_sld00 = Scalar(1) / d.lambda2;
  } else if (g >= Scalar(1)) {
    b_mld00 = Scalar(1) / d.lambda1;
    b_sld00 = 0;
  } else {
    b_mld00 = Scalar(1) / (d.lambda1 + d.lambda2 * (Scalar(1) - g) / g);
    b_sld00 = Scalar(1) / (d.lambda1 * g / (Scalar(1) - g) + d.lambda2);
  }

  d.b_mld = ApChainDistribution<Scalar>::Table::Zero(m + 1, wmax);
  d.b_sld = ApChainDistribution<Scalar>::Table::Zero(m + 1, wmax);
  d.b_mld_prime = ApChainDistribution<Scalar>::Vec::Zero(m + 1);
  for (int i = 0; i <= m; ++i) {
    const long Wi = in.backoff.window(i);
    const Scalar W = Scalar(Wi);
    const Scalar mld_i0 = s_mld(i) * b_mld00;
    const Scalar sld_i0 = s_sld(i) * b_sld00;
    const Scalar boost = Scalar(1) + rx * W / (W - 1);
    d.b_mld(i, 0) = mld_i0;
    d.b_sld(i, 0) = sld_i0;
    for (long k = 1; k < Wi; ++k) {
      const Scalar frac = (W - Scalar(k)) / W;
      d.b_mld(i, k) = frac * boost * mld_i0;
      d.b_sld(i, k) = frac * sld_i0;
    }
    d.b_mld_prime(i) = W / (W - 1) * rx * mld_i0;
  }
  return d;
}

template <typename Scalar>
struct ApTau {
  Scalar tau_ap_mld;
  Scalar tau_ap_sld;
};

template <typename Scalar>
ApTau<Scalar> ap_tau(const ApChainDistribution<Scalar>& d, Scalar p_ap_mld, Scalar p_ap_sld) {
  return {d.b_mld(0, 0) / (Scalar(1) - p_ap_mld), d.b_sld(0, 0) / (Scalar(1) - p_ap_sld)};
}

template <typename Scalar>
ApTau<Scalar> ap_tau(const ApChainInputs<Scalar>& in) {
  return ap_tau(ap_stationary(in), in.p_ap_mld, in.p_ap_sld);
}

} // namespace mlo
