#pragma once

#include "mlo/errors.hpp"

#include <cmath>

namespace mlo {

struct SldTau {
  double tau_case1 = 0;
  double tau_case2 = 0;
};

/// Bianchi transmit probability of a legacy station with minimum window
/// cw_min (so W_0 = cw_min + 1) and m doubling stages.
///
/// (1 - p - p(2p)^m) / (1 - 2p) is expanded as 1 + p * sum_{j<m} (2p)^j,
/// which has no pole at p = 1/2.
template <typename Scalar>
Scalar sld_tau(Scalar p, int cw_min, int m, bool allow_clamp = false) {
  using std::isfinite;
  if (!(p >= Scalar(0)) || !isfinite(p)) throw ModelError("sld_tau: p must be >= 0");
  if (p >= Scalar(1)) throw SingularModelError("sld_tau: p must be < 1");
  if (cw_min < 1) throw ModelError("sld_tau: cw_min must be >= 1");
  if (m < 0) throw ModelError("sld_tau: m must be >= 0");

  Scalar geo(0), term(1);
  for (int j = 0; j < m; ++j) {
    geo += term;
    term *= Scalar(2) * p;
  }
  const Scalar ratio = Scalar(1) + p * geo;
  const Scalar tau = Scalar(1) / (ratio * Scalar(cw_min + 1) / Scalar(2) + Scalar(0.5));
  if (tau > Scalar(1)) {
    if (!allow_clamp) throw ModelInconsistencyError("sld_tau: result exceeds 1");
    return Scalar(1);
  }
  return tau;
}

} // namespace mlo
