#pragma once

#include "mlo/params.hpp"
#include "mlo/sim.hpp"
#include "mlo/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mlo {

struct SweepSpec {
  enum class Axis { joint, n_sld };
  enum class Engines { analysis, sim, both };

  Axis axis = Axis::joint;
  std::vector<int> values;
  int repetitions = 1;
  Engines engines = Engines::analysis;

  /// Scenario at sweep index i.
  ScenarioConfig point(const ScenarioConfig& base, std::size_t i) const;
};

/// Parses "joint=2..7", "n_sld=2..5" or "joint=2,4,6". Throws ConfigError.
SweepSpec parse_sweep(const std::string& text);

struct Tolerances {
  double sld_ul_rel = 0.15;
  double near_zero_abs = 0.5;
};

struct SimSummary {
  double mean = 0;
  double stddev = 0;
};

struct ComparisonRow {
  ScenarioConfig scenario;
  std::optional<ThroughputReport> analysis;
  std::optional<CouplingState> state;
  /// Per class: s_u_sld, s_u_mld, s_d_sld, s_d_mld.
  std::optional<std::array<SimSummary, 4>> sim;
  std::uint64_t nstr_violations = 0;
  bool flagged = false;
};

/// Runs one sweep with a bounded worker pool; rows come back in sweep order.
std::vector<ComparisonRow> run_sweep(const ScenarioConfig& base, const SweepSpec& sweep, const SolverOptions& sopt,
                                     const SimOptions& simopt, int jobs, const Tolerances& tol = {});

void write_analysis_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 success, 1 runtime failure (config, solver, I/O), 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mlo
