#pragma once

#include "mlo/params.hpp"
#include "mlo/solver.hpp"

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mlo {

enum class StationKind { legacy, ap, nonap };

const char* to_string(StationKind k);

struct SimOptions {
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  /// false: no AP traffic at all.
  bool ap_enabled = true;
  /// A non-AP MLD waiting at zero ignores busyness caused by the AP's DL
  /// addressed to that same MLD.
  bool permissive_wait = false;
  /// The AP's busy-restart rule applies whatever the destination. When false
  /// only frames for non-AP MLDs are subject to it.
  bool ap_restart_any_destination = true;
  std::size_t trace_limit = 2000;
};

struct StationCounters {
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t restarts = 0;       ///< redraws caused by the busy-restart rules
  std::uint64_t waits_broken = 0;   ///< non-AP MLD only: waits at zero that ended in a restart
  std::uint64_t successes_to_sld = 0;  ///< AP only
  std::uint64_t successes_to_mld = 0;  ///< AP only
};

struct StationStats {
  StationKind kind = StationKind::legacy;
  int index = 0;  ///< legacy station or MLD index; 0 for the AP
  int link = 0;
  StationCounters c;
};

struct LinkStats {
  std::uint64_t idle_slots = 0;
  std::uint64_t busy_slots = 0;
  std::int64_t idle_ns = 0;
  std::int64_t busy_ns = 0;
  std::int64_t horizon_slots = 0;  ///< grid slots spanned, including a final overhanging exchange

  std::int64_t elapsed_ns() const { return idle_ns + busy_ns; }
};

struct TraceRow {
  std::int64_t slot = 0;
  int link = 0;
  std::string event;          ///< idle | success | collision
  std::string transmitters;   ///< ';'-separated station labels
  std::int64_t duration_ns = 0;
};

struct SimStats {
  std::vector<StationStats> stations;
  LinkStats links[2];
  std::int64_t grid_slots = 0;
  std::int64_t slot_ns = 0;
  std::uint64_t mld_paired_tx = 0;
  std::uint64_t aligned_dl_pairs = 0;
  std::uint64_t nstr_violations = 0;
  std::uint64_t alignment_violations = 0;
  std::vector<TraceRow> trace;

  const StationStats* find(StationKind kind, int index, int link) const;
};

struct SimResult {
  SimStats stats;
  ThroughputReport report;
};

SimResult run_sim(const ScenarioConfig& cfg, const SimOptions& opt = {});

/// Random stream owned by one station on one link.
using RngStream = boost::random::mt19937_64;
RngStream make_stream(std::uint64_t seed, StationKind kind, int index, int link);
/// Uniform integer in [0, n).
long draw_below(RngStream& rng, long n);

} // namespace mlo
