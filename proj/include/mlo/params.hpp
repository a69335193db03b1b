#pragma once

#include <cstdint>
#include <optional>

namespace mlo {

/// Binary exponential backoff ladder shared by the AP MLD and non-AP MLD
/// chains. Legacy stations use cw_min_sld + 1 as their stage-0 window.
struct BackoffParams {
  int w0 = 16;
  int m = 6;
  int cw_min_sld = 15;

  /// W_i = 2^i * W_0
  long window(int stage) const { return static_cast<long>(w0) << stage; }
  long legacy_window(int stage) const { return static_cast<long>(cw_min_sld + 1) << stage; }

  void validate() const;
};

/// PHY/MAC timing. Durations in microseconds, r_su in bits per OFDM symbol.
/// Defaults: 802.11ax MCS 8, 80 MHz, 1 SS, 0.8 us GI.
struct PhyParams {
  double t_phy = 40.0;
  double sigma = 13.6;
  double r_su = 5880.0;
  int n_a = 1;
  int l_d = 1500;                ///< payload bytes per MPDU
  int mpdu_overhead = 36;        ///< MAC header + FCS + delimiter, bytes per MPDU
  double sifs = 16.0;
  double t_ack = 32.0;
  double t_empty = 9.0;

  /// A-MPDU length in bits.
  double l_ampdu() const { return 8.0 * n_a * static_cast<double>(l_d + mpdu_overhead); }
  /// Goodput bits carried by one successful A-MPDU.
  double payload_bits() const { return 8.0 * n_a * static_cast<double>(l_d); }

  void validate() const;
};

struct SlotDurations {
  double t_data = 0;
  double t_success = 0;
  double t_collision = 0;
  double t_empty = 0;
};

struct ScenarioConfig {
  int n_mld = 2;
  int n_sld = 2;
  /// Probability an AP frame is addressed to a non-AP MLD. Unset means
  /// population-proportional: n_mld / (n_mld + n_sld).
  std::optional<double> gamma;
  int links = 2;
  BackoffParams backoff;
  PhyParams phy;

  double effective_gamma() const;
  bool gamma_is_auto() const { return !gamma.has_value(); }
  void validate() const;
};

double compute_t_data(double t_phy, double l_ampdu_bits, double r_su, double sigma);
double compute_t_data(const PhyParams& phy);
SlotDurations compute_slot_durations(const PhyParams& phy);

/// Microseconds to integer nanoseconds.
std::int64_t to_ns(double us);

} // namespace mlo
