#include "mlo/params.hpp"

#include "mlo/errors.hpp"

#include <cmath>
#include <string>

namespace mlo {

void BackoffParams::validate() const {
  if (w0 < 2)
    throw ModelError("backoff.w0 must be >= 2, got " + std::to_string(w0));
  if (m < 1 || m > 20)
    throw ModelError("backoff.m must be in [1, 20], got " + std::to_string(m));
  if (cw_min_sld < 1)
    throw ModelError("backoff.cw_min_sld must be >= 1, got " + std::to_string(cw_min_sld));
}

void PhyParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ModelError(std::string("phy.") + name + " must be > 0");
  };
  positive(t_phy, "t_phy");
  positive(sigma, "sigma");
  positive(r_su, "r_su");
  positive(t_empty, "t_empty");
  if (!(sifs >= 0.0) || !std::isfinite(sifs)) throw ModelError("phy.sifs must be >= 0");
  if (!(t_ack >= 0.0) || !std::isfinite(t_ack)) throw ModelError("phy.t_ack must be >= 0");
  if (n_a < 1) throw ModelError("phy.n_a must be >= 1");
  if (l_d < 1) throw ModelError("phy.l_d must be >= 1");
  if (mpdu_overhead < 0) throw ModelError("phy.mpdu_overhead must be >= 0");
}

double ScenarioConfig::effective_gamma() const {
  if (gamma) return *gamma;
  const int total = n_mld + n_sld;
  return total == 0 ? 0.0 : static_cast<double>(n_mld) / total;
}

void ScenarioConfig::validate() const {
  if (links != 2) throw ModelError("scenario.links must be 2, got " + std::to_string(links));
  if (n_mld < 0) throw ModelError("scenario.n_mld must be >= 0");
  if (n_sld < 0) throw ModelError("scenario.n_sld must be >= 0");
  if (gamma) {
    if (!(*gamma >= 0.0 && *gamma <= 1.0))
      throw ModelError("scenario.gamma must be in [0, 1]");
    if (*gamma > 0.0 && n_mld == 0)
      throw ModelError("scenario.gamma > 0 requires n_mld >= 1");
    if (*gamma < 1.0 && n_sld == 0 && n_mld > 0)
      throw ModelError("scenario.gamma < 1 requires n_sld >= 1");
  }
  backoff.validate();
  phy.validate();
}

double compute_t_data(double t_phy, double l_ampdu_bits, double r_su, double sigma) {
  if (!(r_su > 0.0)) throw ModelError("r_su must be > 0");
  return t_phy + std::ceil(l_ampdu_bits / r_su) * sigma;
}

double compute_t_data(const PhyParams& phy) {
  return compute_t_data(phy.t_phy, phy.l_ampdu(), phy.r_su, phy.sigma);
}

SlotDurations compute_slot_durations(const PhyParams& phy) {
  phy.validate();
  SlotDurations d;
  d.t_data = compute_t_data(phy);
  d.t_success = d.t_data + 2.0 * phy.sifs + phy.t_ack;
  d.t_collision = d.t_data + phy.sifs;
  d.t_empty = phy.t_empty;
  return d;
}

std::int64_t to_ns(double us) { return std::llround(us * 1000.0); }

} // namespace mlo
