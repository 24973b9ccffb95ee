#include "sitdyn/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "sitdyn/entrance_time.hpp"
#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"
#include "sitdyn/releases.hpp"

namespace sitdyn {

namespace {

std::string days(double t) { return fmt::format("{:.0f}", t); }

std::string csv_cell(const std::string& s) {
  if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string axis_tag(const char* prefix, double v) { return fmt::format("{}{:g}", prefix, v); }

bool needs_cloud(TableId t) {
  return t == TableId::TauConstant || t == TableId::PeriodicEffort ||
         t == TableId::PeriodicTime || t == TableId::CaseStudyTime ||
         t == TableId::CaseStudyFemaleRatio;
}

bool wants(const SweepSpec& spec, TableId t) {
  return std::find(spec.tables.begin(), spec.tables.end(), t) != spec.tables.end();
}

/// Ordered table names for the spec; the layout of the output.
std::vector<std::string> table_names(const SweepSpec& spec) {
  std::vector<std::string> names;
  for (TableId t : spec.tables) {
    switch (t) {
      case TableId::EffortRatio:
        names.emplace_back("effort_ratio");
        break;
      case TableId::TauLower:
        names.emplace_back("tau_lower");
        break;
      case TableId::TauUpper:
        for (double phi : spec.phi) names.push_back("tau_upper_" + axis_tag("phi", phi));
        break;
      case TableId::TauConstant:
        for (double phi : spec.phi) names.push_back("tau_constant_" + axis_tag("phi", phi));
        for (double phi : spec.phi) names.push_back("constant_effort_" + axis_tag("phi", phi));
        break;
      case TableId::PeriodicEffort:
        names.emplace_back("periodic_effort_min");
        names.emplace_back("periodic_effort_max");
        break;
      case TableId::PeriodicTime:
        names.emplace_back("periodic_time_min");
        names.emplace_back("periodic_time_max");
        break;
      case TableId::CaseStudyTime:
        for (double r : spec.p) names.push_back("case_study_time_" + axis_tag("p", r));
        break;
      case TableId::CaseStudyFemaleRatio:
        for (double r : spec.p) names.push_back("case_study_female_ratio_" + axis_tag("p", r));
        break;
    }
  }
  // A table listed twice is emitted once.
  std::vector<std::string> unique;
  for (auto& n : names) {
    if (std::find(unique.begin(), unique.end(), n) == unique.end()) unique.push_back(n);
  }
  return unique;
}

using CellValues = std::map<std::string, std::string>;

struct PeriodicRun {
  double T = 0.0;
  double t_star = 0.0;
  double rho_tot = 0.0;
};

void periodic_cells(const SweepSpec& spec, const ModelParams& p, const DominanceTree& tree,
                    const NumericsSpec& n, CellValues& out) {
  std::vector<PeriodicRun> runs;
  for (double T : spec.T) {
    for (double phi : spec.phi) {
      const auto s = ReleaseSchedule::impulsive(lambda_for_phi(phi, T, p), T);
      const ControlledEntrance e =
          entrance_time_controlled(s, p, tree, /*with_Fst=*/false, n.dt, n.max_steps);
      if (e.entered) runs.push_back({T, e.t_star, e.rho_tot});
    }
  }
  auto put = [&](const std::string& key, const PeriodicRun* r, bool effort) {
    if (!r) {
      out[key] = kNotAvailable;
    } else if (effort) {
      out[key] = fmt::format("{:.0f} ({:g}, {:.0f})", r->rho_tot, r->T, r->t_star);
    } else {
      out[key] = fmt::format("{:.0f} ({:g}, {:.0f})", r->t_star, r->T, r->rho_tot);
    }
  };
  // Ties keep the first run in (T, phi) order.
  const PeriodicRun* emin = nullptr;
  const PeriodicRun* emax = nullptr;
  const PeriodicRun* tmin = nullptr;
  const PeriodicRun* tmax = nullptr;
  for (const auto& r : runs) {
    if (!emin || r.rho_tot < emin->rho_tot) emin = &r;
    if (!emax || r.rho_tot > emax->rho_tot) emax = &r;
    if (!tmin || r.t_star < tmin->t_star) tmin = &r;
    if (!tmax || r.t_star > tmax->t_star) tmax = &r;
  }
  if (wants(spec, TableId::PeriodicEffort)) {
    put("periodic_effort_min", emin, true);
    put("periodic_effort_max", emax, true);
  }
  if (wants(spec, TableId::PeriodicTime)) {
    put("periodic_time_min", tmin, false);
    put("periodic_time_max", tmax, false);
  }
}

CellValues compute_cell(const SweepSpec& spec, const ModelParams& p, const NumericsSpec& n,
                        std::optional<std::uint64_t> seed) {
  CellValues out;
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.E_minus || !ss.M_plus) return out;  // every cell of this row/column is N/A

  std::optional<double> level;
  try {
    level = effort_level(spec.effort_basis, p);
  } catch (const Error&) {
  }

  if (wants(spec, TableId::EffortRatio) && level) {
    out["effort_ratio"] = fmt::format("{:.2f}", *level / *ss.M_plus);
  }
  if (wants(spec, TableId::TauLower)) {
    try {
      out["tau_lower"] = days(tau_lower_bound(p));
    } catch (const NotApplicable&) {
    } catch (const NumericFailure&) {
    }
  }
  if (wants(spec, TableId::TauUpper) && level) {
    for (double phi : spec.phi) {
      const UpperBound ub = tau_upper_bound(phi * *level, p);
      if (ub.days) out["tau_upper_" + axis_tag("phi", phi)] = days(*ub.days);
    }
  }

  const bool cloud_needed = std::any_of(spec.tables.begin(), spec.tables.end(), needs_cloud);
  if (!cloud_needed) return out;
  const SeparatrixCloud cloud = numerics_cloud(p, n, 1, seed);
  const DominanceTree tree(cloud.points);

  if (wants(spec, TableId::TauConstant) && level) {
    for (double phi : spec.phi) {
      const double Mi = phi * *level;
      const EntranceTime e = tau_numeric(Mi, p, tree, n.dt, n.max_steps);
      if (!e.entered) continue;
      out["tau_constant_" + axis_tag("phi", phi)] = days(e.t);
      out["constant_effort_" + axis_tag("phi", phi)] =
          fmt::format("{:.0f}", constant_total_effort(Mi, e.t, p));
    }
  }
  if (wants(spec, TableId::PeriodicEffort) || wants(spec, TableId::PeriodicTime)) {
    periodic_cells(spec, p, tree, n, out);
  }
  if (wants(spec, TableId::CaseStudyTime) || wants(spec, TableId::CaseStudyFemaleRatio)) {
    for (double ratio : spec.p) {
      const auto s = ReleaseSchedule::impulsive(ratio * *ss.M_plus, spec.case_T);
      const ControlledEntrance e =
          entrance_time_controlled(s, p, tree, /*with_Fst=*/true, n.dt, n.max_steps);
      if (!e.entered) continue;
      out["case_study_time_" + axis_tag("p", ratio)] = days(e.t_star);
      out["case_study_female_ratio_" + axis_tag("p", ratio)] =
          fmt::format("{:.6f}", e.female_ratio);
    }
  }
  return out;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out = "nu_E\\beta";
  for (double c : t.cols) out += fmt::format(",{:g}", c);
  out += '\n';
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out += fmt::format("{:g}", t.rows[i]);
    for (const auto& cell : t.cells[i]) out += "," + csv_cell(cell);
    out += '\n';
  }
  return out;
}

void write_table(const Table& t, const std::string& dir) {
  const std::filesystem::path d = dir.empty() ? std::string(".") : dir;
  std::filesystem::create_directories(d);
  const auto path = d / (t.name + ".csv");
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << to_csv(t);
}

double effort_level(EffortBasis basis, const ModelParams& p) {
  if (basis == EffortBasis::OneStep) return one_step_effort_level(p);
  const MiCrit mc = mi_crit(p);
  if (!(mc.value > 0.0)) throw NoPositiveEquilibrium("M_i^crit is not positive");
  return mc.value;
}

double effort_ratio(EffortBasis basis, const ModelParams& p) {
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.M_plus) throw NoPositiveEquilibrium("no wild equilibrium at M_i = 0");
  return effort_level(basis, p) / *ss.M_plus;
}

SeparatrixCloud numerics_cloud(const ModelParams& p, const NumericsSpec& n, int jobs,
                               std::optional<std::uint64_t> seed) {
  std::optional<std::uint64_t> jitter;
  if (n.jitter) jitter = seed.value_or(0);
  return cached_cloud(p, n.mesh_n, n.epsilon, n.dt, jobs, n.cache_dir, n.build_missing,
                      n.mesh_scaling, jitter);
}

std::vector<Table> run_sweep(const SweepSpec& spec, const ModelSpec& model,
                             const NumericsSpec& numerics, int jobs,
                             std::optional<std::uint64_t> seed) {
  spec.validate();
  const std::size_t nr = spec.nu_E.size();
  const std::size_t nc = spec.beta.size();

  // Resolve every cell up front so configuration errors surface before work starts.
  std::vector<ModelParams> params;
  params.reserve(nr * nc);
  for (double nu : spec.nu_E) {
    for (double beta : spec.beta) params.push_back(model.resolve(nu, beta));
  }

  std::vector<CellValues> results(nr * nc);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      try {
        results[i] = compute_cell(spec, params[i], numerics, seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = results.size();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(results.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Table> tables;
  for (const auto& name : table_names(spec)) {
    Table t;
    t.name = name;
    t.rows = spec.nu_E;
    t.cols = spec.beta;
    t.cells.assign(nr, std::vector<std::string>(nc, kNotAvailable));
    for (std::size_t i = 0; i < nr; ++i) {
      for (std::size_t j = 0; j < nc; ++j) {
        const auto& cell = results[i * nc + j];
        if (auto it = cell.find(name); it != cell.end()) t.cells[i][j] = it->second;
      }
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

Trajectory case_study_trajectory(const ModelParams& p, double ratio, double T,
                                 const DominanceTree& tree, const NumericsSpec& n) {
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.E_plus) throw NoPositiveEquilibrium("no wild equilibrium at M_i = 0");
  const State3 ep = *ss.E_plus;
  const double Fst = p.r * p.nu_E * ep.E * std::exp(-p.beta * ep.M) / p.mu_F;
  const State4 s0{ep.E, ep.M, 0.0, ep.F, Fst};
  const auto schedule = ReleaseSchedule::impulsive(ratio * ep.M, T);
  const NsfdConfig cfg = make_nsfd_config(p, n.dt, /*controlled=*/true, n.max_steps);
  return simulate(
      s0, schedule, cfg, p, [&](double, const State4& x) { return tree.query_below(x.wild()); },
      n.stride, /*track_Fst=*/true);
}

void write_case_study_csv(const Trajectory& tr, const ModelParams& p, std::ostream& os) {
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.E_plus) throw NoPositiveEquilibrium("no wild equilibrium at M_i = 0");
  const State3 ep = *ss.E_plus;
  const double Fst = p.r * p.nu_E * ep.E * std::exp(-p.beta * ep.M) / p.mu_F;
  os << "t,E,M,Mi,F,Fst,egg_ratio,female_ratio,fertile_female_ratio,fertile_male_ratio\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const State4& s = tr.states[i];
    const double females = s.F + s.Fst;
    const double males = s.M + s.Mi;
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},", tr.times[i], s.E, s.M,
                      s.Mi, s.F, s.Fst);
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", s.E / ep.E, females / (ep.F + Fst),
                      females > 0.0 ? s.F / females : 0.0, males > 0.0 ? s.M / males : 0.0);
  }
}

}  // namespace sitdyn
