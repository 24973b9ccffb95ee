// Command-line front end: equilibria, simulations, separatrix clouds,
// entrance times and table sweeps.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sitdyn/config.hpp"
#include "sitdyn/dynamics.hpp"
#include "sitdyn/entrance_time.hpp"
#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"
#include "sitdyn/experiments.hpp"
#include "sitdyn/releases.hpp"
#include "sitdyn/separatrix.hpp"

namespace {

using namespace sitdyn;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Globals& g) {
  if (g.config.empty()) return RunConfig{};
  return load_config(g.config);
}

std::string out_dir(const Globals& g, const std::string& fallback = ".") {
  return g.out.empty() ? fallback : g.out;
}

std::string fmt_state(const State3& s) {
  return fmt::format("E = {:.6g}, M = {:.6g}, F = {:.6g}", s.E, s.M, s.F);
}

std::string stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
  }
  return "?";
}

int cmd_equilibria(const Globals& g) {
  const RunConfig cfg = load(g);
  const ModelParams p = cfg.model.resolve();
  const Aggregates a = aggregates(p);
  const SteadyStateSet ss = steady_states(0.0, p);
  fmt::print("N = {:.9g}\npsi = {:.9g}\nK = {:.9g}\n", a.N, a.psi, p.K);
  if (ss.E_minus) {
    fmt::print("E_- : {} ({})\n", fmt_state(*ss.E_minus), stability_name(*ss.minus_stability));
  }
  if (ss.E_plus) {
    fmt::print("E_+ : {} ({})\n", fmt_state(*ss.E_plus), stability_name(*ss.plus_stability));
  }
  if (ss.positive_count() == 0) fmt::print("no positive steady state\n");
  const MiCrit mc = mi_crit(p);
  fmt::print("Mi_crit = {:.9g} (upper estimate {:.9g})\n", mc.value, mc.upper_estimate);
  if (ss.M_plus) {
    fmt::print("rho* = {:.6g}\n", mc.value / *ss.M_plus);
    fmt::print("one-step ratio = {:.6g}\n", one_step_effort_level(p) / *ss.M_plus);
  }
  return kExitOk;
}

int cmd_simulate(const Globals& g) {
  const RunConfig cfg = load(g);
  if (!cfg.schedule) throw ConfigError("simulate needs a [schedule] section");
  const ModelParams p = cfg.model.resolve();
  const ReleaseSchedule sched = cfg.schedule->resolve(p);
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.E_plus) throw NoPositiveEquilibrium("no wild equilibrium to start from");
  const State3 ep = *ss.E_plus;
  const double Fst = p.r * p.nu_E * ep.E * std::exp(-p.beta * ep.M) / p.mu_F;
  const State4 s0{ep.E, ep.M, sched.Mi0, ep.F, Fst};
  const auto steps = static_cast<long>(std::ceil(cfg.numerics.horizon / cfg.numerics.dt - 1e-9));
  const NsfdConfig nsfd = make_nsfd_config(p, cfg.numerics.dt, true, steps);
  const Trajectory tr = simulate(s0, sched, nsfd, p, {}, cfg.numerics.stride, true);
  const auto dir = out_dir(g);
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / "trajectory.csv";
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_trajectory_csv(tr, os);
  fmt::print("wrote {} ({} rows, {} steps)\n", path.string(), tr.times.size(), tr.steps);
  return kExitOk;
}

int cmd_threshold(const Globals& g) {
  const RunConfig cfg = load(g);
  if (!cfg.schedule) throw ConfigError("threshold needs a [schedule] section");
  const ModelParams p = cfg.model.resolve();
  const ReleaseSchedule sched = cfg.schedule->resolve(p);
  const MiEnvelope env = mi_envelope(sched, p.mu_i, cfg.numerics.dt);
  const MiCrit mc = mi_crit(p);
  fmt::print("Mi lower = {:.9g}\nMi upper = {:.9g}\nMi_crit = {:.9g}\n", env.Mi_lower,
             env.Mi_upper, mc.value);
  const ThresholdVerdict v = extinction_threshold_check(sched, p, cfg.numerics.dt);
  const char* name = v == ThresholdVerdict::GloballyStable0 ? "globally-stable-0"
                     : v == ThresholdVerdict::Bistable      ? "bistable"
                                                            : "inconclusive";
  fmt::print("verdict = {}\n", name);
  if (sched.kind == ScheduleKind::Impulsive) {
    fmt::print("sufficient impulse at this period = {:.9g}\n", sufficient_impulse(sched.T, p));
    fmt::print("sufficient period at this impulse = {:.9g}\n", sufficient_period(sched.Lambda, p));
  }
  return kExitOk;
}

int cmd_separatrix_build(const Globals& g) {
  const RunConfig cfg = load(g);
  const ModelParams p = cfg.model.resolve();
  const SeparatrixCloud cloud = numerics_cloud(p, cfg.numerics, g.jobs, g.seed);
  fmt::print("fingerprint = {}\npoints = {}\nmax E = {:.6g}, max M = {:.6g}, max F = {:.6g}\n",
             cloud.fingerprint, cloud.points.size(), cloud.max_E(), cloud.max_M(),
             cloud.max_F());
  if (!g.out.empty()) {
    const auto path = std::filesystem::path(g.out) / "cloud.txt";
    save_cloud(cloud, path.string());
    fmt::print("wrote {}\n", path.string());
  }
  return kExitOk;
}

int cmd_separatrix_query(const Globals& g, const std::vector<double>& point,
                         const std::string& cloud_path) {
  const RunConfig cfg = load(g);
  const ModelParams p = cfg.model.resolve();
  SeparatrixCloud cloud;
  if (!cloud_path.empty()) {
    const bool jitter = cfg.numerics.jitter;
    cloud = load_cloud(cloud_path,
                       cloud_fingerprint(p, 0.0, cfg.numerics.dt, cfg.numerics.mesh_scaling,
                                         jitter ? g.seed.value_or(0)
                                                : std::optional<std::uint64_t>{}));
  } else {
    NumericsSpec n = cfg.numerics;
    cloud = numerics_cloud(p, n, g.jobs, g.seed);
  }
  const DominanceTree tree(cloud.points);
  const State3 x{point[0], point[1], point[2]};
  fmt::print("{}\n", tree.query_below(x) ? "below" : "not-below");
  return kExitOk;
}

int cmd_tau(const Globals& g, const std::vector<double>& phis, const std::string& basis_name) {
  const RunConfig cfg = load(g);
  const ModelParams p = cfg.model.resolve();
  const EffortBasis basis = parse_effort_basis(basis_name);
  const double level = effort_level(basis, p);
  const SeparatrixCloud cloud = numerics_cloud(p, cfg.numerics, g.jobs, g.seed);
  const DominanceTree tree(cloud.points);
  fmt::print("basis = {}, level = {:.9g}\n", to_string(basis), level);
  fmt::print("lower bound = {:.6g}\n", tau_lower_bound(p));
  fmt::print("phi,Mi,tau,upper_bound\n");
  for (double phi : phis) {
    const double Mi = phi * level;
    const EntranceTime e = tau_numeric(Mi, p, tree, cfg.numerics.dt, cfg.numerics.max_steps);
    const UpperBound ub = tau_upper_bound(Mi, p);
    fmt::print("{:g},{:.9g},{},{}\n", phi, Mi, e.entered ? fmt::format("{:.1f}", e.t) : "N/A",
               ub.days ? fmt::format("{:.1f}", *ub.days) : "N/A");
  }
  return kExitOk;
}

struct SweepOverrides {
  std::vector<std::string> tables;
  std::string nu_E, beta, phi, T, p, basis;
};

void apply_overrides(SweepSpec& w, const SweepOverrides& o) {
  if (!o.tables.empty()) {
    w.tables.clear();
    for (const auto& t : o.tables) w.tables.push_back(parse_table_id(t));
  }
  if (!o.nu_E.empty()) w.nu_E = parse_number_list(o.nu_E);
  if (!o.beta.empty()) w.beta = parse_number_list(o.beta);
  if (!o.phi.empty()) w.phi = parse_number_list(o.phi);
  if (!o.T.empty()) w.T = parse_number_list(o.T);
  if (!o.p.empty()) w.p = parse_number_list(o.p);
  if (!o.basis.empty()) w.effort_basis = parse_effort_basis(o.basis);
  w.validate();
}

int run_tables(const Globals& g, const RunConfig& cfg, const SweepSpec& w) {
  const auto tables = run_sweep(w, cfg.model, cfg.numerics, g.jobs, g.seed);
  const std::string dir = !g.out.empty() ? g.out : (!w.output.empty() ? w.output : ".");
  for (const auto& t : tables) {
    write_table(t, dir);
    fmt::print("wrote {}\n", (std::filesystem::path(dir) / (t.name + ".csv")).string());
  }
  return kExitOk;
}

int cmd_sweep(const Globals& g, const SweepOverrides& o) {
  const RunConfig cfg = load(g);
  SweepSpec w = cfg.sweep.value_or(default_sweep());
  apply_overrides(w, o);
  return run_tables(g, cfg, w);
}

int cmd_case_study(const Globals& g, const SweepOverrides& o, double ratio) {
  const RunConfig cfg = load(g);
  SweepSpec w = cfg.sweep.value_or(case_study_sweep());
  if (!cfg.sweep) w.tables = {TableId::CaseStudyTime, TableId::CaseStudyFemaleRatio};
  apply_overrides(w, o);
  run_tables(g, cfg, w);
  if (cfg.model.nu_E && cfg.model.beta) {
    const ModelParams p = cfg.model.resolve();
    const SeparatrixCloud cloud = numerics_cloud(p, cfg.numerics, g.jobs, g.seed);
    const DominanceTree tree(cloud.points);
    const Trajectory tr = case_study_trajectory(p, ratio, w.case_T, tree, cfg.numerics);
    const std::string dir = out_dir(g, w.output.empty() ? "." : w.output);
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / "case_study_trajectory.csv";
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    write_case_study_csv(tr, p, os);
    fmt::print("wrote {} (entered: {}, t = {:.1f})\n", path.string(),
               tr.reason == StopReason::Condition ? "yes" : "no", tr.times.back());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sterile-release population dynamics toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for the mesh nudge jitter");

  auto* equilibria = app.add_subcommand("equilibria", "Steady states, Mi_crit and effort ratio");
  auto* simulate = app.add_subcommand("simulate", "Trajectory of the controlled model to CSV");
  auto* threshold = app.add_subcommand("threshold", "Extinction test for a release schedule");

  auto* separatrix = app.add_subcommand("separatrix", "Separatrix cloud management");
  separatrix->require_subcommand(1);
  auto* sep_build = separatrix->add_subcommand("build", "Build (or load) the cached cloud");
  auto* sep_query = separatrix->add_subcommand("query", "Is a state below the separatrix?");
  std::vector<double> point;
  std::string cloud_path;
  sep_query->add_option("--point", point, "E M F")->expected(3)->required();
  sep_query->add_option("--cloud", cloud_path, "Cloud file (default: cache)");

  auto* tau = app.add_subcommand("tau", "Entrance time under constant releases");
  std::vector<double> phis{1.2, 2.0, 8.0};
  std::string basis = "critical";
  tau->add_option("--phi", phis, "Multiples of the effort level")->delimiter(',');
  tau->add_option("--basis", basis, "critical | one-step");

  SweepOverrides overrides;
  auto* sweep = app.add_subcommand("sweep", "Reproduce a table over a (nu_E, beta) grid");
  auto* case_study = app.add_subcommand("case-study", "Weekly impulsive releases study");
  for (auto* sub : {sweep, case_study}) {
    sub->add_option("--table", overrides.tables, "Table id(s)")->delimiter(',');
    sub->add_option("--nu-E", overrides.nu_E, "Comma-separated nu_E grid");
    sub->add_option("--beta", overrides.beta, "Comma-separated beta grid");
    sub->add_option("--phi", overrides.phi, "Comma-separated effort multiples");
    sub->add_option("--T", overrides.T, "Comma-separated release periods");
    sub->add_option("--p", overrides.p, "Comma-separated effort ratios Lambda/M+");
    sub->add_option("--basis", overrides.basis, "critical | one-step");
  }
  double ratio = 8.0;
  case_study->add_option("--ratio", ratio, "Effort ratio of the exported trajectory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (equilibria->parsed()) return cmd_equilibria(g);
    if (simulate->parsed()) return cmd_simulate(g);
    if (threshold->parsed()) return cmd_threshold(g);
    if (sep_build->parsed()) return cmd_separatrix_build(g);
    if (sep_query->parsed()) return cmd_separatrix_query(g, point, cloud_path);
    if (tau->parsed()) return cmd_tau(g, phis, basis);
    if (sweep->parsed()) return cmd_sweep(g, overrides);
    if (case_study->parsed()) return cmd_case_study(g, overrides, ratio);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    fmt::print(stderr, "invalid parameter: {}\n", e.what());
    return kExitConfig;
  } catch (const FingerprintMismatch& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kExitConfig;
  } catch (const MalformedFile& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kExitNumeric;
  }
  return kExitConfig;
}
