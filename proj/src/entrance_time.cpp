#include "sitdyn/entrance_time.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"

namespace sitdyn {

namespace {

double wild_male_equilibrium(const ModelParams& p) {
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.M_plus) throw NoPositiveEquilibrium("no wild equilibrium at M_i = 0");
  return *ss.M_plus;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double TComponents::max() const { return std::max({t_E, t_F, t_M}); }

AnalyticBoundContext analytic_context(double Mi, const ModelParams& p) {
  if (!(Mi > 0.0)) throw InvalidParameter("M_i must be positive");
  const double Mp = wild_male_equilibrium(p);
  return analytic_context_eps(Mp / (Mp + Mi), p);
}

AnalyticBoundContext analytic_context_eps(double eps, const ModelParams& p) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
  const Aggregates ag = aggregates(p);
  AnalyticBoundContext c;
  c.N = ag.N;
  c.psi = ag.psi;
  c.Z = Z_psi(ag.psi);
  c.Z0 = 1.0 + ag.psi - ag.psi * c.Z;
  const double a = p.nu_E + p.mu_E;
  const double d = a - p.mu_F;
  c.sigma = sign_of(d);
  c.sigma_E = p.mu_M / a;
  c.sigma_F = p.mu_M / p.mu_F;
  c.eps = eps;
  const double sFE = c.sigma_F - c.sigma_E;
  const double disc = sFE * sFE + 4.0 * c.N * c.sigma_E * c.sigma_F * eps;
  c.G = std::sqrt(disc);
  c.g_eps = sFE != 0.0 ? c.G / std::abs(sFE) : INFINITY;

  const double brn = p.b * p.r * p.nu_E;
  c.Gd = std::sqrt(d * d + 4.0 * brn * eps);
  c.kappa_plus = 0.5 * (-(a + p.mu_F) + c.Gd);
  c.kappa_minus = 0.5 * (-(a + p.mu_F) - c.Gd);
  c.x_plus = (d + c.Gd) / (2.0 * p.b);
  c.x_minus = (d - c.Gd) / (2.0 * p.b);

  const double N = c.N;
  const double one = 1.0 - 1.0 / N;
  const double cc = (2.0 * N - 1.0) * a + p.mu_F;
  c.r0_plus = 0.5 * p.K * one * (1.0 + cc / c.Gd);
  c.r0_minus = 0.5 * p.K * one * (1.0 - cc / c.Gd);
  const double pref = p.K * one / (4.0 * p.b * c.Gd);
  c.s0_plus = pref * (d + c.Gd) * (c.Gd + cc);
  c.s0_minus = pref * (d - c.Gd) * (c.Gd - cc);

  const double sE = c.sigma_E;
  const double sF = c.sigma_F;
  const double num = (2.0 * N - 1.0) * sF + sE;
  c.r_tilde_plus = 0.5 * (1.0 + num / c.G);
  c.r_tilde_minus = 0.5 * (1.0 - num / c.G);
  c.alpha = ((N - 1.0) * sF + 1.0 - eps * N) / ((sF - 1.0) * (sE - 1.0) - eps * N);
  const double base = 2.0 * sE * sF - (sE + sF);
  c.alpha_plus = 2.0 * sE * sF / (base + c.G) * c.r_tilde_plus;
  c.alpha_minus = 2.0 * sE * sF / (base - c.G) * c.r_tilde_minus;

  c.rate_E = a;
  c.mu_F = p.mu_F;
  c.mu_M = p.mu_M;
  c.c_coef = cc;
  c.start = {one * p.K, one / ag.lambda, one * p.K * N * a / p.b};
  return c;
}

TComponents t_components(const AnalyticBoundContext& c) {
  if (!(c.eps * c.N < 1.0)) throw NotApplicable("eps >= 1/N: comparison system does not decay");
  if (!(c.r0_minus < 0.0)) throw NotApplicable("r0_minus >= 0: one-step bound unavailable");
  const double inv = 1.0 / -c.kappa_plus;
  const double N = c.N;
  TComponents t;
  t.t_E = inv * std::log((N - 1.0) / (2.0 * c.psi) * (1.0 + c.c_coef / c.Gd));
  t.t_F = inv * std::log(N * (N - 1.0) / c.psi);
  const double mu_M = c.mu_M;
  if (mu_M + c.kappa_plus < 0.0) {
    t.t_M = std::log((N - 1.0) * (c.alpha + c.alpha_minus) / c.psi) / mu_M;
  } else if (mu_M + c.kappa_minus > 0.0) {
    t.t_M = inv * std::log((N - 1.0) * (c.alpha + c.alpha_plus) / c.psi);
  } else {
    throw NotApplicable("mu_M lies between -kappa_plus and -kappa_minus");
  }
  return t;
}

double tau_lower_bound(const ModelParams& p) {
  const Aggregates a = aggregates(p);
  const double Z = Z_psi(a.psi);
  const double w = 1.0 - a.psi * Z;
  const double Z0 = 1.0 + a.psi - a.psi * Z;
  if (!(a.N > Z0 / (w * w))) throw NoPositiveEquilibrium("lower bound needs N > F(psi)");
  const double N = a.N;
  const double pz = a.psi * Z;
  const double arg = 1.0 + N * N * w * w * w / (pz * Z0 * Z0) - N * w / (pz * Z0);
  return std::log(arg) / p.mu_F;
}

UpperBound tau_upper_bound_eps(double eps, const ModelParams& p) {
  const AnalyticBoundContext c = analytic_context_eps(eps, p);
  UpperBound out;
  const double N = c.N;
  const double sE = c.sigma_E;
  const double sF = c.sigma_F;
  if (!(sF > 1.0)) out.failed.emplace_back("sigma_F > 1");
  if (!(sE > 1.0)) out.failed.emplace_back("sigma_E > 1");
  if (!(eps < 1.0 / N)) out.failed.emplace_back("eps < 1/N");
  if (!(c.G < std::max((2.0 * N - 1.0) * sF + sE, (2.0 * sE - 1.0) * sF))) {
    out.failed.emplace_back("g(eps) sigma (sigma_F - sigma_E) < max((2N-1) sigma_F + sigma_E, "
                            "(2 sigma_E - 1) sigma_F)");
  }
  if (!((sF - 1.0) * (sE - 1.0) > eps * N)) {
    out.failed.emplace_back("(sigma_F - 1)(sigma_E - 1) > eps N");
  }
  if (!out.failed.empty()) return out;
  const double A = ((N - 1.0) * sF + 1.0 - eps * N) / ((sF - 1.0) * (sE - 1.0) - eps * N);
  const double B = sE * sF * (c.G + (2.0 * N - 1.0) * sF + sE) /
                   ((2.0 * sE * sF - (sE + sF) + c.G) * c.G);
  out.days = 2.0 * sE / (p.mu_F * (sF + sE - c.G)) * std::log((N - 1.0) / c.psi * (A + B));
  return out;
}

UpperBound tau_upper_bound(double Mi, const ModelParams& p) {
  if (!(Mi > 0.0)) {
    return UpperBound{std::nullopt, {"eps < 1/N"}};
  }
  const double Mp = wild_male_equilibrium(p);
  return tau_upper_bound_eps(Mp / (Mp + Mi), p);
}

bool one_step_condition(double rho, const ModelParams& p) { return rho > aggregates(p).N - 1.0; }

bool two_step_condition(double rho, const ModelParams& p) {
  const double N = aggregates(p).N;
  return rho * ((rho + 1.0) * p.mu_M / ((1.0 - p.r) * p.nu_E) + N - 1.0) > N - 1.0;
}

EntranceTime tau_numeric(double Mi, const ModelParams& p, const DominanceTree& tree, double dt,
                         long max_steps) {
  if (!(Mi >= 0.0)) throw InvalidParameter("M_i must be non-negative");
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.E_plus) throw NoPositiveEquilibrium("no wild equilibrium at M_i = 0");
  const NsfdConfig cfg = make_nsfd_config(p, dt, /*controlled=*/false, max_steps);
  State3 s = *ss.E_plus;
  EntranceTime out;
  for (long n = 0; n <= max_steps; ++n) {
    if (tree.query_below(s)) {
      out.entered = true;
      out.t = static_cast<double>(n) * dt;
      out.steps = n;
      return out;
    }
    if (n == max_steps) break;
    s = nsfd_step(s, Mi, cfg, p);
  }
  out.steps = max_steps;
  return out;
}

ControlledEntrance entrance_time_controlled(const ReleaseSchedule& s, const ModelParams& p,
                                            const DominanceTree& tree, bool with_Fst, double dt,
                                            long max_steps) {
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.E_plus) throw NoPositiveEquilibrium("no wild equilibrium at M_i = 0");
  const State3 ep = *ss.E_plus;
  State4 s0{ep.E, ep.M, s.Mi0, ep.F, 0.0};
  const double Fst_star = p.r * p.nu_E * ep.E * std::exp(-p.beta * ep.M) / p.mu_F;
  if (with_Fst) s0.Fst = Fst_star;

  const NsfdConfig cfg = make_nsfd_config(p, dt, /*controlled=*/true, max_steps);
  const Trajectory tr = simulate(
      s0, s, cfg, p, [&](double, const State4& x) { return tree.query_below(x.wild()); },
      std::max(1L, max_steps), with_Fst);

  ControlledEntrance out;
  out.steps = tr.steps;
  if (tr.reason != StopReason::Condition) return out;
  out.entered = true;
  out.t_star = tr.times.back();
  const State4& fin = tr.states.back();
  const double Mp = ep.M;
  switch (s.kind) {
    case ScheduleKind::Constant:
      out.n_tot = 0;
      out.rho_tot = s.u0 * out.t_star / Mp;
      break;
    case ScheduleKind::Periodic: {
      long n = static_cast<long>(std::floor(out.t_star / s.T + 1e-9));
      if (s.N_r) n = std::min(n, *s.N_r);
      out.n_tot = n;
      double per_period = 0.0;
      const std::size_t k = s.profile.size();
      for (std::size_t i = 0; i + 1 < k; ++i) {
        per_period += 0.5 * (s.profile[i].second + s.profile[i + 1].second) *
                      (s.profile[i + 1].first - s.profile[i].first);
      }
      per_period += s.profile.front().second * s.profile.front().first;
      per_period += s.profile.back().second * (s.T - s.profile.back().first);
      out.rho_tot = static_cast<double>(n) * per_period / Mp;
      break;
    }
    case ScheduleKind::Impulsive: {
      long n = static_cast<long>(std::floor(out.t_star / s.T + 1e-9));
      if (s.N_r) n = std::min(n, *s.N_r);
      out.n_tot = n;
      out.rho_tot = static_cast<double>(n) * s.Lambda / Mp;
      break;
    }
  }
  if (with_Fst) out.female_ratio = (fin.F + fin.Fst) / (ep.F + Fst_star);
  return out;
}

double constant_total_effort(double Mi, double t, const ModelParams& p) {
  return Mi / wild_male_equilibrium(p) * p.mu_i * t;
}

}  // namespace sitdyn
