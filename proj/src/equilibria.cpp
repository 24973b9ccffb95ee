#include "sitdyn/equilibria.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "roots.hpp"
#include "sitdyn/dynamics.hpp"
#include "sitdyn/error.hpp"

namespace sitdyn {

namespace {

constexpr double kRootTol = 1e-12;
// Round-off tolerance on the h_pm radicand. Relative to 1, so it also covers
// the s0 endpoint, which is only known to bisection accuracy.
constexpr double kRadicandClamp = 1e-12;

// q(s) = s/(1 - e^{-s}) with its limit 1 at s = 0.
double q_of(double s) {
  if (s < 1e-8) return 1.0 + 0.5 * s;
  return s / -std::expm1(-s);
}

// q'(s), computed without cancellation near 0.
double dq_of(double s) {
  if (s < 1e-3) return 0.5 - s / 3.0 + s * s / 8.0;
  const double a = -std::expm1(-s);
  return (a - s * std::exp(-s)) / (a * a);
}

double radicand(double s, double xi) {
  double R = 1.0 - xi * q_of(s);
  if (R < 0.0 && R > -kRadicandClamp) R = 0.0;
  return R;
}

double h_plus_log(double s, double psi, double xi) {
  const double R = radicand(s, xi);
  if (R < 0.0) return -INFINITY;
  const double c = 0.5 / psi;
  return s - c + c * std::sqrt(R);
}

double dh_plus_log(double s, double psi, double xi) {
  const double R = radicand(s, xi);
  if (R <= 0.0) return -INFINITY;
  const double c = 0.5 / psi;
  return 1.0 - c * xi * dq_of(s) / (2.0 * std::sqrt(R));
}

// Positive x where f changes from convex to concave (0 if already concave).
double inflection(double y, double N, double psi) {
  const double xmax = 1.0 / psi;
  if (f_dxx(0.0, y, N, psi) <= 0.0) return 0.0;
  return detail::bisect([&](double x) { return f_dxx(x, y, N, psi); }, 0.0, xmax, kRootTol,
                        "inflection of f");
}

}  // namespace

double f_characteristic(double x, double y, double N, double psi) {
  const double u = x + y;
  return x * (1.0 - psi * x) * -std::expm1(-u) - u / N;
}

double f_dx(double x, double y, double N, double psi) {
  const double u = x + y;
  const double e = std::exp(-u);
  return (1.0 - 2.0 * psi * x) * -std::expm1(-u) - 1.0 / N + x * (1.0 - psi * x) * e;
}

double f_dxx(double x, double y, double /*N*/, double psi) {
  const double u = x + y;
  const double e = std::exp(-u);
  return -2.0 * psi * -std::expm1(-u) + e * (2.0 - (4.0 * psi + 1.0) * x + psi * x * x);
}

double theta0_log(double xi) {
  if (!(xi > 0.0)) throw InvalidParameter("xi must be positive");
  if (xi >= 1.0) {
    throw NoPositiveEquilibrium(fmt::format("xi = {:.6g} >= 1: no nonzero steady state", xi));
  }
  // g(s) = 1 - e^{-s} - xi s is positive just right of 0 and negative at 1/xi.
  auto g = [xi](double s) { return -std::expm1(-s) - xi * s; };
  double lo = 0.0;
  // Start just past the origin where g > 0 for certain: g'(0) = 1 - xi > 0.
  double small = std::min(1e-3, (1.0 - xi));
  while (g(small) <= 0.0 && small > 1e-300) small *= 0.5;
  lo = small;
  const double hi = 1.0 / xi;
  // g(1/xi) = -exp(-1/xi) is below round-off once xi is small; the root then
  // coincides with 1/xi to working precision.
  if (g(hi) >= 0.0) return hi;
  return detail::bisect(g, lo, hi, kRootTol * std::max(1.0, hi), "theta0");
}

double theta0(double xi) { return std::exp(-theta0_log(xi)); }

HPair h_pm_log(double s, double N, double psi) {
  const double xi = 4.0 * psi / N;
  const double s0 = theta0_log(xi);
  if (!(s >= 0.0) || s > s0 * (1.0 + 1e-12)) {
    throw InvalidParameter(fmt::format("h_pm: s = {:.6g} outside [0, {:.6g}]", s, s0));
  }
  double R = radicand(s, xi);
  if (R < 0.0) R = 0.0;
  const double c = 0.5 / psi;
  const double root = c * std::sqrt(R);
  return {s - c - root, s - c + root};
}

HPair h_pm(double theta, double N, double psi) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidParameter("h_pm: theta outside (0, 1]");
  return h_pm_log(-std::log(theta), N, psi);
}

MiCrit mi_crit(const ModelParams& p) {
  const Aggregates a = aggregates(p);
  if (!(a.N > 4.0 * a.psi)) {
    throw NoPositiveEquilibrium(
        fmt::format("N = {:.6g} <= 4 psi = {:.6g}: no positive steady state", a.N, 4 * a.psi));
  }
  const double xi = a.xi;
  const double psi = a.psi;
  const double s0 = theta0_log(xi);

  // Coarse scan, then golden-section in the best cell, then bisection on the
  // sign of the derivative for the final digits.
  constexpr int kScan = 4000;
  int best = 0;
  double best_val = h_plus_log(0.0, psi, xi);
  for (int k = 1; k <= kScan; ++k) {
    const double s = s0 * k / kScan;
    const double v = h_plus_log(s, psi, xi);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  double s_star = 0.0;
  if (best == 0 && dh_plus_log(0.0, psi, xi) <= 0.0) {
    s_star = 0.0;
  } else {
    double lo = s0 * std::max(0, best - 1) / kScan;
    double hi = s0 * std::min(kScan, best + 1) / kScan;
    auto [sg, vg] = detail::golden_max([&](double s) { return h_plus_log(s, psi, xi); }, lo, hi,
                                       1e-8 * std::max(1.0, hi));
    (void)vg;
    s_star = sg;
    auto d = [&](double s) { return dh_plus_log(s, psi, xi); };
    const double w = 1e-6 * std::max(1.0, s0);
    const double a_lo = std::max(lo, sg - w);
    const double a_hi = std::min(hi, sg + w);
    if (d(a_lo) > 0.0 && d(a_hi) < 0.0) {
      s_star = detail::bisect(d, a_lo, a_hi, 1e-10 * std::max(1.0, sg), "h_+ maximiser");
    }
  }
  const double hmax = h_plus_log(s_star, psi, xi);
  const double scale = 1.0 / (p.gamma_i * p.beta);
  MiCrit out;
  out.value = hmax * scale;
  const double ytilde = a.N / (4.0 * psi) * (1.0 - 1.0 / a.N) * (1.0 - 1.0 / a.N);
  out.upper_estimate = ytilde * scale;
  out.s_argmax = s_star;
  return out;
}

State3 state_from_male(double M, const ModelParams& p) {
  const Aggregates a = aggregates(p);
  const double lm = a.lambda * M;
  State3 s;
  s.M = M;
  s.E = p.K * lm;
  s.F = p.K * (p.nu_E + p.mu_E) / p.b * lm / (1.0 - lm);
  return s;
}

double one_step_effort_level(const ModelParams& p) {
  const SteadyStateSet ss = steady_states(0.0, p);
  if (!ss.M_plus) throw NoPositiveEquilibrium("no wild equilibrium at M_i = 0");
  const double N = aggregates(p).N;
  return (N - 1.0) * *ss.M_plus / p.gamma_i;
}

SteadyStateSet steady_states(double Mi, const ModelParams& p) {
  if (!(Mi >= 0.0)) throw InvalidParameter("M_i must be non-negative");
  const Aggregates a = aggregates(p);
  const double N = a.N;
  const double psi = a.psi;
  const double y = p.beta * p.gamma_i * Mi;
  const double xmax = 1.0 / psi;

  SteadyStateSet out;
  auto f = [&](double x) { return f_characteristic(x, y, N, psi); };

  const double x_inf = inflection(y, N, psi);
  // On [x_inf, 1/psi] f is concave, so its derivative decreases through 0 at
  // the maximiser (if f is still increasing at x_inf).
  if (f_dx(x_inf, y, N, psi) <= 0.0) return out;
  const double x_m = detail::bisect([&](double x) { return f_dx(x, y, N, psi); }, x_inf, xmax,
                                    kRootTol, "argmax of f");
  const double fmax = f(x_m);
  const double degenerate = 1e-14 * std::max(1.0, x_m);
  if (fmax < -degenerate) return out;

  std::vector<double> roots;
  if (fmax <= degenerate) {
    roots.push_back(x_m);
  } else {
    double x_minus = 0.0;
    if (y > 0.0) {
      x_minus = detail::bisect(f, 0.0, x_m, kRootTol, "lower root of f");
    } else {
      // Divide out the trivial root at 0.
      auto g = [&](double x) { return (1.0 - psi * x) * -std::expm1(-x) - 1.0 / N; };
      x_minus = detail::bisect(g, 0.0, x_m, kRootTol, "lower root of f");
    }
    const double x_plus = detail::bisect(f, x_m, xmax, kRootTol, "upper root of f");
    roots = {x_minus, x_plus};
  }

  if (roots.size() == 1) {
    const double M = roots[0] / p.beta;
    out.M_plus = M;
    out.E_plus = state_from_male(M, p);
    out.plus_stability = classify_stability(*out.E_plus, Mi, p);
  } else {
    out.M_minus = roots[0] / p.beta;
    out.M_plus = roots[1] / p.beta;
    out.E_minus = state_from_male(*out.M_minus, p);
    out.E_plus = state_from_male(*out.M_plus, p);
    out.minus_stability = classify_stability(*out.E_minus, Mi, p);
    out.plus_stability = classify_stability(*out.E_plus, Mi, p);
  }
  return out;
}

Stability classify_stability(const State3& s, double Mi, const ModelParams& p) {
  if (s.E == 0.0 && s.M == 0.0 && s.F == 0.0) return Stability::Stable;
  // Residual check, each component relative to the size of its own terms.
  const State3 d = rhs_simplified(s, Mi, p);
  const double sE = p.b * s.F + (p.nu_E + p.mu_E) * s.E;
  const double sM = (1.0 - p.r) * p.nu_E * s.E + p.mu_M * s.M;
  const double sF = p.r * p.nu_E * s.E + p.mu_F * s.F;
  const double res = std::max({std::abs(d.E) / sE, std::abs(d.M) / sM, std::abs(d.F) / sF});
  if (!(res < 1e-6)) {
    throw InvalidParameter(fmt::format("not a steady state (relative residual {:.3g})", res));
  }
  const Aggregates a = aggregates(p);
  const double gMi = p.gamma_i * Mi;
  const double ratio = s.M / (s.M + gMi);
  const double lm = a.lambda * s.M;
  const double lhs =
      (1.0 - lm) * (1.0 + gMi / (s.M + gMi) + p.beta * s.M * (-1.0 + a.N * ratio * (1.0 - lm)));
  return lhs < 1.0 ? Stability::Stable : Stability::Unstable;
}

double Z_psi(double psi) {
  if (!(psi > 0.0)) throw InvalidParameter("psi must be positive");
  auto g = [psi](double Z) { return std::exp(-Z) * (1.0 + psi - psi * Z) - psi; };
  // g < 0 at 1/(2 psi) and at log(1 + 1/psi), where e^{-Z} = psi/(1 + psi).
  const double hi = std::min(0.5 / psi, std::log1p(1.0 / psi));
  return detail::bisect(g, 0.0, hi, kRootTol * std::max(1.0, hi), "Z(psi)");
}

double F_psi(double psi) {
  const double Z = Z_psi(psi);
  const double w = 1.0 - psi * Z;
  return (1.0 + psi - psi * Z) / (w * w);
}

EquilibriumBounds equilibrium_bounds(const ModelParams& p) {
  const Aggregates a = aggregates(p);
  const double N = a.N;
  const double psi = a.psi;
  EquilibriumBounds out;
  out.Z = Z_psi(psi);
  const double w = 1.0 - psi * out.Z;
  const double Z0 = 1.0 + psi - psi * out.Z;
  out.F_psi = Z0 / (w * w);
  if (!(N > 2.0) || !(N > out.F_psi)) {
    throw NoPositiveEquilibrium(
        fmt::format("bounds need N > 2 and N > F(psi) (N = {:.6g}, F = {:.6g})", N, out.F_psi));
  }
  out.kappa_lower = 1.0 + psi / w;
  out.kappa_star = N - psi * out.Z * Z0 / (w * w);

  const double aE = p.nu_E + p.mu_E;
  const double K = p.K;
  const double lam = a.lambda;
  const double inv_lam = 1.0 / lam;

  const double e_low = lam * K / (N * p.beta);
  out.under_E_minus = {e_low, 1.0 / (N * p.beta), aE / p.b * e_low};

  const double cs = 1.0 - out.kappa_star / N;
  out.over_E_minus = {cs * K, cs * inv_lam, cs * aE / p.b * K * N / out.kappa_star};

  const double cl = 1.0 - out.kappa_lower / N;
  out.under_E_plus = {cl * K, cl * inv_lam, cl * aE / p.b * K * N / out.kappa_lower};

  const double c1 = 1.0 - 1.0 / N;
  out.over_E_plus = {c1 * K, c1 * inv_lam, c1 * K * N * aE / p.b};
  return out;
}

}  // namespace sitdyn
