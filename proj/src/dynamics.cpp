#include "sitdyn/dynamics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sitdyn/error.hpp"

namespace sitdyn {

double fertile_fraction(double M, double Mi, const ModelParams& p) {
  const double total = M + p.gamma_i * Mi;
  if (total <= 0.0) return 0.0;
  return -std::expm1(-p.beta * total) * (M / total);
}

double sterile_fraction(double M, double Mi, const ModelParams& p) {
  const double total = M + p.gamma_i * Mi;
  if (total <= 0.0) return 1.0;
  const double e = std::exp(-p.beta * total);
  return e + p.gamma_i * Mi / total * -std::expm1(-p.beta * total);
}

State5 rhs_full(const State5& s, double Mi, const ModelParams& p) {
  State5 d;
  d.E = p.b * s.F * (1.0 - s.E / p.K) - (p.nu_E_tilde + p.mu_E) * s.E;
  d.L = p.nu_E_tilde * s.E - (p.nu_L + p.mu_L) * s.L;
  d.M = (1.0 - p.r) * p.nu_L * s.L - p.mu_M * s.M;
  d.F = p.r * p.nu_L * s.L * fertile_fraction(s.M, Mi, p) - p.mu_F * s.F;
  d.Fst = p.r * p.nu_L * s.L * sterile_fraction(s.M, Mi, p) - p.mu_F * s.Fst;
  return d;
}

State3 rhs_simplified(const State3& s, double Mi, const ModelParams& p) {
  State3 d;
  d.E = p.b * s.F * (1.0 - s.E / p.K) - (p.nu_E + p.mu_E) * s.E;
  d.M = (1.0 - p.r) * p.nu_E * s.E - p.mu_M * s.M;
  d.F = p.r * p.nu_E * s.E * fertile_fraction(s.M, Mi, p) - p.mu_F * s.F;
  return d;
}

State4 rhs_controlled(const State4& s, double u, const ModelParams& p) {
  const State3 w = rhs_simplified(s.wild(), s.Mi, p);
  State4 d;
  d.E = w.E;
  d.M = w.M;
  d.F = w.F;
  d.Mi = u - p.mu_i * s.Mi;
  d.Fst = p.r * p.nu_E * s.E * sterile_fraction(s.M, s.Mi, p) - p.mu_F * s.Fst;
  return d;
}

NsfdConfig make_nsfd_config(const ModelParams& p, double dt, bool controlled, long max_steps) {
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  if (max_steps < 0) throw InvalidParameter("max_steps must be non-negative");
  NsfdConfig c;
  c.dt = dt;
  c.Q = std::max({p.mu_M, p.mu_F, p.nu_E + p.mu_E});
  if (controlled) c.Q = std::max(c.Q, p.mu_i);
  c.phi_dt = c.Q > 0.0 ? -std::expm1(-c.Q * dt) / c.Q : dt;
  c.max_steps = max_steps;
  return c;
}

namespace {

// Shared wild-compartment update; Mi_next is the sterile level already
// advanced to step n + 1.
inline void wild_step(double& E, double& M, double& F, double Mi_next, double phi,
                      const ModelParams& p) {
  const double E0 = E;
  const double M0 = M;
  const double F0 = F;
  E = (E0 + phi * (p.b * F0 - (p.nu_E + p.mu_E) * E0)) / (1.0 + phi * p.b * F0 / p.K);
  M = M0 + phi * ((1.0 - p.r) * p.nu_E * E0 - p.mu_M * M0);
  F = F0 + phi * (p.r * p.nu_E * fertile_fraction(M, Mi_next, p) * E0 - p.mu_F * F0);
}

}  // namespace

State4 nsfd_step(const State4& s, double u, const NsfdConfig& cfg, const ModelParams& p) {
  const double phi = cfg.phi_dt;
  State4 n = s;
  n.Mi = s.Mi + phi * (u - p.mu_i * s.Mi);
  wild_step(n.E, n.M, n.F, n.Mi, phi, p);
  n.Fst = s.Fst + phi * (p.r * p.nu_E * sterile_fraction(n.M, n.Mi, p) * s.E - p.mu_F * s.Fst);
  return n;
}

State3 nsfd_step(const State3& s, double Mi, const NsfdConfig& cfg, const ModelParams& p) {
  State3 n = s;
  wild_step(n.E, n.M, n.F, Mi, cfg.phi_dt, p);
  return n;
}

Trajectory simulate(const State4& s0, const ReleaseSchedule& schedule, const NsfdConfig& cfg,
                    const ModelParams& p, const StopPredicate& stop, long stride,
                    bool track_Fst) {
  if (stride < 1) throw InvalidParameter("stride must be at least 1");
  schedule.validate();
  Trajectory tr;
  tr.has_Fst = track_Fst;
  State4 s = s0;
  if (!track_Fst) s.Fst = 0.0;

  long next_impulse = 0;
  auto apply_impulses = [&](long n) {
    if (schedule.kind != ScheduleKind::Impulsive) return;
    const double t = static_cast<double>(n) * cfg.dt;
    while ((!schedule.N_r || next_impulse < *schedule.N_r) &&
           static_cast<double>(next_impulse) * schedule.T <= t + 0.5 * cfg.dt) {
      s.Mi += schedule.Lambda;
      tr.events.push_back({static_cast<double>(next_impulse) * schedule.T, "impulse"});
      ++next_impulse;
    }
  };

  apply_impulses(0);
  tr.times.push_back(0.0);
  tr.states.push_back(s);
  if (stop && stop(0.0, s)) {
    tr.reason = StopReason::Condition;
    tr.events.push_back({0.0, "stop"});
    return tr;
  }
  for (long n = 1; n <= cfg.max_steps; ++n) {
    const double t_prev = static_cast<double>(n - 1) * cfg.dt;
    s = nsfd_step(s, schedule.rate(t_prev), cfg, p);
    if (!track_Fst) s.Fst = 0.0;
    apply_impulses(n);
    const double t = static_cast<double>(n) * cfg.dt;
    tr.steps = n;
    const bool stopped = stop && stop(t, s);
    if (stopped || n % stride == 0 || n == cfg.max_steps) {
      tr.times.push_back(t);
      tr.states.push_back(s);
    }
    if (stopped) {
      tr.reason = StopReason::Condition;
      tr.events.push_back({t, "stop"});
      return tr;
    }
  }
  tr.reason = StopReason::MaxSteps;
  tr.events.push_back({static_cast<double>(cfg.max_steps) * cfg.dt, "max_steps"});
  return tr;
}

void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
  os << (tr.has_Fst ? "t,E,M,Mi,F,Fst\n" : "t,E,M,Mi,F\n");
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const State4& s = tr.states[i];
    if (tr.has_Fst) {
      os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", tr.times[i], s.E, s.M,
                        s.Mi, s.F, s.Fst);
    } else {
      os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", tr.times[i], s.E, s.M, s.Mi,
                        s.F);
    }
  }
}

namespace {

std::vector<double> rk4_run(const VectorField& rhs, std::vector<double> x, double horizon,
                            long steps, long per_record, std::vector<std::vector<double>>* rec) {
  const double h = horizon / static_cast<double>(steps);
  const std::size_t d = x.size();
  std::vector<double> tmp(d);
  if (rec) rec->push_back(x);
  for (long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * h;
    const auto k1 = rhs(t, x);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const auto k2 = rhs(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const auto k3 = rhs(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + h * k3[i];
    const auto k4 = rhs(t + h, tmp);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      // Clamp round-off below zero; genuine negativity would be far larger.
      if (x[i] < 0.0 && x[i] > -1e-12 * (1.0 + std::abs(k1[i]) * h)) x[i] = 0.0;
    }
    if (rec && (n + 1) % per_record == 0) rec->push_back(x);
  }
  return x;
}

double rel_sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // A run that blew up at a coarse step is never converged.
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) return INFINITY;
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace

ReferenceTrajectory reference_integrate(const VectorField& rhs, const std::vector<double>& s0,
                                        double horizon, double tol, double record_dt,
                                        long max_steps) {
  if (!(horizon > 0.0) || !(record_dt > 0.0) || !(tol > 0.0)) {
    throw InvalidParameter("reference_integrate: horizon, record_dt and tol must be positive");
  }
  const double ratio = horizon / record_dt;
  const long records = std::lround(ratio);
  if (records < 1 || std::abs(ratio - static_cast<double>(records)) > 1e-9 * ratio) {
    throw InvalidParameter("reference_integrate: record_dt must divide the horizon");
  }
  long per_record = 1;
  auto prev = rk4_run(rhs, s0, horizon, records * per_record, per_record, nullptr);
  while (true) {
    per_record *= 2;
    if (records * per_record > max_steps) {
      throw NumericFailure("reference_integrate: step count overflow before convergence");
    }
    auto cur = rk4_run(rhs, s0, horizon, records * per_record, per_record, nullptr);
    const bool done = rel_sup_diff(cur, prev) < tol;
    prev = std::move(cur);
    if (done) break;
  }
  ReferenceTrajectory out;
  out.steps_per_record = per_record;
  rk4_run(rhs, s0, horizon, records * per_record, per_record, &out.states);
  out.times.reserve(out.states.size());
  for (long k = 0; k <= records; ++k) out.times.push_back(static_cast<double>(k) * record_dt);
  return out;
}

}  // namespace sitdyn
