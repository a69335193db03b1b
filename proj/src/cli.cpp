#include "mlo/cli.hpp"

#include "mlo/calibration.hpp"
#include "mlo/config.hpp"
#include "mlo/errors.hpp"
#include "mlo/trace.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace mlo {

ScenarioConfig SweepSpec::point(const ScenarioConfig& base, std::size_t i) const {
  ScenarioConfig c = base;
  c.n_sld = values.at(i);
  if (axis == Axis::joint) c.n_mld = values.at(i);
  return c;
}

SweepSpec parse_sweep(const std::string& text) {
  SweepSpec s;
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("sweep must look like AXIS=RANGE, got '" + text + "'");
  const std::string axis = text.substr(0, eq), range = text.substr(eq + 1);
  if (axis == "joint")
    s.axis = SweepSpec::Axis::joint;
  else if (axis == "n_sld")
    s.axis = SweepSpec::Axis::n_sld;
  else
    throw ConfigError("unknown sweep axis '" + axis + "' (expected joint or n_sld)");

  auto to_int = [&](const std::string& v) {
    std::size_t used = 0;
    int x = 0;
    try {
      x = std::stoi(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size() || x < 0) throw ConfigError("bad sweep value '" + v + "'");
    return x;
  };
  if (const auto dots = range.find(".."); dots != std::string::npos) {
    const int a = to_int(range.substr(0, dots)), b = to_int(range.substr(dots + 2));
    if (b < a) throw ConfigError("empty sweep range '" + range + "'");
    for (int v = a; v <= b; ++v) s.values.push_back(v);
  } else {
    std::stringstream ss(range);
    for (std::string item; std::getline(ss, item, ',');) s.values.push_back(to_int(item));
  }
  if (s.values.empty()) throw ConfigError("empty sweep range");
  return s;
}

namespace {

constexpr const char* kClasses[4] = {"s_u_sld", "s_u_mld", "s_d_sld", "s_d_mld"};

std::array<double, 4> as_array(const ThroughputReport& r) { return {r.s_u_sld, r.s_u_mld, r.s_d_sld, r.s_d_mld}; }

SimSummary summarize(const std::vector<double>& v) {
  SimSummary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

/// Runs fn(i) for i in [0, n) on at most `jobs` threads. The first exception
/// is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

std::string point_label(const ScenarioConfig& c) { return fmt::format("n_mld={} n_sld={}", c.n_mld, c.n_sld); }

} // namespace

std::vector<ComparisonRow> run_sweep(const ScenarioConfig& base, const SweepSpec& sweep, const SolverOptions& sopt,
                                     const SimOptions& simopt, int jobs, const Tolerances& tol) {
  const bool ana = sweep.engines != SweepSpec::Engines::sim;
  const bool sim = sweep.engines != SweepSpec::Engines::analysis;
  if (sim && sweep.repetitions < 1) throw ConfigError("at least one seed is required for simulation");

  const std::size_t npts = sweep.values.size();
  const std::size_t reps = sim ? static_cast<std::size_t>(sweep.repetitions) : 0;
  std::vector<ComparisonRow> rows(npts);
  std::vector<std::vector<std::array<double, 4>>> sims(npts, std::vector<std::array<double, 4>>(reps));
  std::vector<std::vector<std::uint64_t>> viol(npts, std::vector<std::uint64_t>(reps, 0));
  for (std::size_t i = 0; i < npts; ++i) rows[i].scenario = sweep.point(base, i);

  // task k < npts: analysis of point k; the rest: (point, seed) simulations
  const std::size_t ntask = (ana ? npts : 0) + npts * reps;
  parallel_for(ntask, jobs, [&](std::size_t k) {
    if (ana && k < npts) {
      try {
        CouplingState s = solve_fixed_point(rows[k].scenario, sopt);
        rows[k].analysis = throughput(rows[k].scenario, s, NthModel::enumerated(rows[k].scenario.backoff),
                                      sopt.strict_paper);
        rows[k].state = s;
      } catch (const std::exception& e) {
        throw std::runtime_error(fmt::format("analysis at {}: {}", point_label(rows[k].scenario), e.what()));
      }
      return;
    }
    const std::size_t j = k - (ana ? npts : 0);
    const std::size_t pt = j / reps, rep = j % reps;
    SimOptions o = simopt;
    o.seed = simopt.seed + rep;
    try {
      const SimResult r = run_sim(rows[pt].scenario, o);
      sims[pt][rep] = as_array(r.report);
      viol[pt][rep] = r.stats.nstr_violations + r.stats.alignment_violations;
    } catch (const std::exception& e) {
      throw std::runtime_error(
          fmt::format("simulation at {} seed {}: {}", point_label(rows[pt].scenario), o.seed, e.what()));
    }
  });

  for (std::size_t i = 0; i < npts; ++i) {
    ComparisonRow& row = rows[i];
    if (sim) {
      std::array<SimSummary, 4> s;
      for (int c = 0; c < 4; ++c) {
        std::vector<double> v;
        for (const auto& rep : sims[i]) v.push_back(rep[c]);
        s[c] = summarize(v);
      }
      row.sim = s;
      for (auto v : viol[i]) row.nstr_violations += v;
    }
    if (row.analysis && row.sim) {
      const auto a = as_array(*row.analysis);
      const auto& s = *row.sim;
      if (a[0] > 0 && std::abs(s[0].mean - a[0]) > tol.sld_ul_rel * a[0]) row.flagged = true;
      for (int c = 1; c < 4; ++c)
        if (std::abs(s[c].mean - a[c]) > std::max(tol.sld_ul_rel * a[c], tol.near_zero_abs)) row.flagged = true;
    }
  }
  return rows;
}

void write_analysis_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "point,n_mld,n_sld,gamma,tau_ap_sld,tau_ap_mld,tau_mld_1,tau_mld_2,tau_sld_1,tau_sld_2,"
         "x_ap,x_mld,y_case1,y_case2,s_u_sld,s_u_mld,s_d_sld,s_d_mld,iterations\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.analysis || !r.state) continue;
    const auto& t = r.state->taus;
    const auto& b = r.state->busy;
    const auto& a = *r.analysis;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", i, r.scenario.n_mld,
               r.scenario.n_sld, r.scenario.effective_gamma(), t.tau_ap_sld, t.tau_ap_mld, t.tau_mld_1,
               t.tau_mld_2, t.tau_sld_1, t.tau_sld_2, b.x_ap, b.x_mld, b.y_case1, b.y_case2, a.s_u_sld, a.s_u_mld,
               a.s_d_sld, a.s_d_mld, r.state->iterations);
  }
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "point,n_mld,n_sld,gamma";
  for (const char* c : kClasses) out << fmt::format(",ana_{0},sim_{0}_mean,sim_{0}_std,err_{0}_pct", c);
  out << ",nstr_violations,flagged\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    fmt::print(out, "{},{},{},{}", i, r.scenario.n_mld, r.scenario.n_sld, r.scenario.effective_gamma());
    for (int c = 0; c < 4; ++c) {
      const std::string ana = r.analysis ? fmt::format("{}", as_array(*r.analysis)[c]) : "";
      std::string mean, sd, err;
      if (r.sim) {
        mean = fmt::format("{}", (*r.sim)[c].mean);
        sd = fmt::format("{}", (*r.sim)[c].stddev);
        if (r.analysis && as_array(*r.analysis)[c] > 0)
          err = fmt::format("{}", 100.0 * std::abs((*r.sim)[c].mean - as_array(*r.analysis)[c]) /
                                      as_array(*r.analysis)[c]);
      }
      fmt::print(out, ",{},{},{},{}", ana, mean, sd, err);
    }
    fmt::print(out, ",{},{}\n", r.sim ? std::to_string(r.nstr_violations) : "", r.flagged ? 1 : 0);
  }
}

namespace {

struct Common {
  std::string config;
  std::string gamma;
  bool strict_paper = false;
  std::string out;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : load_config(c.config);
  if (!c.gamma.empty()) {
    if (c.gamma == "auto") {
      cfg.gamma.reset();
    } else {
      double g = 0;
      std::size_t used = 0;
      try {
        g = std::stod(c.gamma, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.gamma.size() || !(g >= 0.0 && g <= 1.0))
        throw UsageError("--gamma must be a number in [0, 1] or 'auto', got '" + c.gamma + "'");
      cfg.gamma = g;
    }
  }
  cfg.validate();
  return cfg;
}

void write_out(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  fn(f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

void print_report(std::ostream& out, const ScenarioConfig& cfg, const CouplingState& s, const ThroughputReport& r) {
  fmt::print(out, "scenario  n_mld={} n_sld={} gamma={:.3f}{}\n", cfg.n_mld, cfg.n_sld, cfg.effective_gamma(),
             cfg.gamma_is_auto() ? " (auto)" : "");
  fmt::print(out, "solver    iterations={} residual={:.3e} n_th={}\n", s.iterations, s.residual_norm, r.nth_model);
  const auto& t = s.taus;
  const auto& p = s.ps;
  fmt::print(out, "tau       ap_sld={:.6f} ap_mld={:.6f} mld_1={:.6g} mld_2={:.6g} sld_1={:.6f} sld_2={:.6f}\n",
             t.tau_ap_sld, t.tau_ap_mld, t.tau_mld_1, t.tau_mld_2, t.tau_sld_1, t.tau_sld_2);
  fmt::print(out, "p         ap_sld={:.6f} ap_mld={:.6f} mld_1={:.6f} mld_2={:.6f} sld_1={:.6f} sld_2={:.6f}\n",
             p.p_ap_sld, p.p_ap_mld, p.p_mld_1, p.p_mld_2, p.p_sld_1, p.p_sld_2);
  fmt::print(out, "busy      x_ap={:.6f} x_mld={:.6f} y_case1={:.6g} y_case2={:.6g}\n", s.busy.x_ap, s.busy.x_mld,
             s.busy.y_case1, s.busy.y_case2);
  fmt::print(out, "\n{:<10}{:>12}\n", "class", "Mbps");
  const auto v = as_array(r);
  for (int c = 0; c < 4; ++c) fmt::print(out, "{:<10}{:>12.3f}\n", kClasses[c], v[c]);
}

void print_table(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  fmt::print(out, "{:>6}{:>6}", "n_mld", "n_sld");
  for (const char* c : kClasses) fmt::print(out, "{:>12}{:>12}", std::string("ana_") + (c + 2), std::string("sim_") + (c + 2));
  fmt::print(out, "{:>10}\n", "sld_err%");
  for (const auto& r : rows) {
    fmt::print(out, "{:>6}{:>6}", r.scenario.n_mld, r.scenario.n_sld);
    for (int c = 0; c < 4; ++c) {
      const std::string a = r.analysis ? fmt::format("{:.3f}", as_array(*r.analysis)[c]) : "-";
      const std::string s = r.sim ? fmt::format("{:.3f}", (*r.sim)[c].mean) : "-";
      fmt::print(out, "{:>12}{:>12}", a, s);
    }
    if (r.analysis && r.sim && r.analysis->s_u_sld > 0)
      fmt::print(out, "{:>10.3f}{}\n", 100.0 * std::abs((*r.sim)[0].mean - r.analysis->s_u_sld) / r.analysis->s_u_sld,
                 r.flagged ? "  !" : "");
    else
      fmt::print(out, "{:>10}\n", "-");
  }
}

SweepSpec::Engines parse_engines(const std::string& e) {
  if (e == "analysis") return SweepSpec::Engines::analysis;
  if (e == "sim") return SweepSpec::Engines::sim;
  if (e == "both") return SweepSpec::Engines::both;
  throw UsageError("--engines must be analysis, sim or both");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Coexistence analysis and simulation of multi-link and legacy Wi-Fi devices"};
  app.require_subcommand(1);
  Common common;
  std::string sweep_text, engines = "both";
  int seeds = 3;
  std::uint64_t seed = 1;
  double duration = 5.0;
  bool permissive = false, anderson = false;
  double anchor_ul = 158.4, anchor_dl = 2.2;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "scenario config (INI)");
    sub->add_option("--gamma", common.gamma, "override gamma: number in [0, 1] or 'auto'");
    sub->add_flag("--strict-paper", common.strict_paper, "use the literal printed forms of the event terms");
    sub->add_option("--out", common.out, "CSV output path");
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seeds", seeds, "simulation seeds per point")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "first seed");
    sub->add_option("--duration-s", duration, "virtual seconds per run")->check(CLI::NonNegativeNumber);
    sub->add_flag("--permissive-wait", permissive, "waiting MLD links ignore the AP's DL to the same MLD");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the analytical model");
  add_common(solve);
  solve->add_option("--sweep", sweep_text, "AXIS=RANGE, e.g. joint=2..7 or n_sld=2..5");
  solve->add_flag("--anderson", anderson, "Anderson acceleration");

  CLI::App* compare = app.add_subcommand("compare", "analysis vs simulation over a sweep");
  add_common(compare);
  add_sim(compare);
  compare->add_option("--sweep", sweep_text, "AXIS=RANGE")->required();
  compare->add_option("--engines", engines, "analysis | sim | both");

  CLI::App* simulate = app.add_subcommand("simulate", "run the slot-level simulator at one point");
  add_common(simulate);
  add_sim(simulate);

  CLI::App* calib = app.add_subcommand("calibrate", "fit n_a and r_su to anchor throughputs");
  add_common(calib);
  calib->add_option("--anchor-ul", anchor_ul, "legacy uplink Mbps at N_MLD = N_SLD = 2");
  calib->add_option("--anchor-dl", anchor_dl, "legacy downlink Mbps at N_MLD = N_SLD = 2; 0 keeps n_a");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const ScenarioConfig cfg = load(common);
    SolverOptions sopt;
    sopt.strict_paper = common.strict_paper;
    sopt.anderson = anderson;
    SimOptions simopt;
    simopt.seed = seed;
    simopt.duration_s = duration;
    simopt.permissive_wait = permissive;

    if (solve->parsed()) {
      if (sweep_text.empty()) {
        const CouplingState s = solve_fixed_point(cfg, sopt);
        const ThroughputReport r = throughput(cfg, s, NthModel::enumerated(cfg.backoff), sopt.strict_paper);
        print_report(out, cfg, s, r);
        if (!common.out.empty()) {
          ComparisonRow row{cfg, r, s, std::nullopt, 0, false};
          write_out(common.out, [&](std::ostream& f) { write_analysis_csv(f, {row}); });
        }
        return 0;
      }
      SweepSpec sw = parse_sweep(sweep_text);
      sw.engines = SweepSpec::Engines::analysis;
      const auto rows = run_sweep(cfg, sw, sopt, simopt, common.jobs);
      print_table(out, rows);
      if (!common.out.empty()) write_out(common.out, [&](std::ostream& f) { write_analysis_csv(f, rows); });
      return 0;
    }

    if (compare->parsed()) {
      SweepSpec sw = parse_sweep(sweep_text);
      sw.engines = parse_engines(engines);
      sw.repetitions = seeds;
      const auto rows = run_sweep(cfg, sw, sopt, simopt, common.jobs);
      print_table(out, rows);
      std::size_t flagged = 0;
      for (const auto& r : rows) flagged += r.flagged;
      if (flagged) fmt::print(out, "\n{} point(s) outside tolerance (marked !)\n", flagged);
      if (!common.out.empty()) write_out(common.out, [&](std::ostream& f) { write_comparison_csv(f, rows); });
      return 0;
    }

    if (simulate->parsed()) {
      std::vector<double> acc[4];
      for (int r = 0; r < seeds; ++r) {
        SimOptions o = simopt;
        o.seed = seed + static_cast<std::uint64_t>(r);
        const SimResult res = run_sim(cfg, o);
        const auto v = as_array(res.report);
        for (int c = 0; c < 4; ++c) acc[c].push_back(v[c]);
        fmt::print(out, "seed {}: nstr_violations={} alignment_violations={} paired_ul={} aligned_dl={}\n", o.seed,
                   res.stats.nstr_violations, res.stats.alignment_violations, res.stats.mld_paired_tx,
                   res.stats.aligned_dl_pairs);
        if (!common.out.empty()) {
          std::string path = common.out;
          if (seeds > 1) {
            const auto dot = path.rfind('.');
            const std::string suffix = fmt::format(".seed{}", o.seed);
            path = dot == std::string::npos ? path + suffix : path.substr(0, dot) + suffix + path.substr(dot);
          }
          trace_export(res.stats, path);
        }
      }
      fmt::print(out, "\n{:<10}{:>12}{:>12}\n", "class", "mean", "stddev");
      for (int c = 0; c < 4; ++c) {
        const SimSummary s = summarize(acc[c]);
        fmt::print(out, "{:<10}{:>12.3f}{:>12.3f}\n", kClasses[c], s.mean, s.stddev);
      }
      return 0;
    }

    if (calib->parsed()) {
      CalibrationTarget target;
      target.s_u_sld = anchor_ul;
      target.s_d_sld = anchor_dl;
      const CalibrationResult res = calibrate(cfg, target, sopt);
      ScenarioConfig fitted = cfg;
      fitted.phy = res.phy;
      fmt::print(out, "n_a = {}\nr_su = {}\ns_u_sld = {:.3f}\ns_d_sld = {:.3f}\n", res.phy.n_a, res.phy.r_su,
                 res.at_anchor.s_u_sld, res.at_anchor.s_d_sld);
      if (!common.out.empty()) write_out(common.out, [&](std::ostream& f) { write_config(f, fitted); });
      return 0;
    }
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    fmt::print(err, "error: {} (last residual {:.3e})\n", e.what(), e.last_residual());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
  return 2;
}

} // namespace mlo
