#include "sitdyn/releases.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"

namespace sitdyn {

namespace {

// Even number of Simpson panels at resolution at most dt over [0, T].
long simpson_panels(double T, double dt) {
  long n = std::max(2L, static_cast<long>(std::ceil(T / dt)));
  if (n % 2) ++n;
  return n;
}

}  // namespace

double periodic_fixed_point(const ReleaseSchedule& s, double mu_i, double dt) {
  if (s.kind != ScheduleKind::Periodic) throw InvalidParameter("schedule is not periodic");
  s.validate();
  const double T = s.T;
  const long n = simpson_panels(T, dt);
  const double h = T / static_cast<double>(n);
  double acc = 0.0;
  for (long k = 0; k <= n; ++k) {
    const double t = h * static_cast<double>(k);
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += w * s.profile_at(t) * std::exp(mu_i * t);
  }
  const double integral = acc * h / 3.0;
  // Periodicity M(T) = M(0) with M(T) = e^{-mu T}(M(0) + integral).
  const double decay = std::exp(-mu_i * T);
  return decay / -std::expm1(-mu_i * T) * integral;
}

MiEnvelope mi_envelope(const ReleaseSchedule& s, double mu_i, double dt) {
  s.validate();
  if (!(mu_i > 0.0)) throw InvalidParameter("mu_i must be positive");
  MiEnvelope env;
  switch (s.kind) {
    case ScheduleKind::Constant:
      env.Mi_limit = s.u0 / mu_i;
      env.Mi_lower = env.Mi_upper = env.Mi_limit;
      break;
    case ScheduleKind::Impulsive: {
      const double q = -std::expm1(-mu_i * s.T);
      env.Mi_upper = s.Lambda / q;
      env.Mi_lower = s.Lambda * std::exp(-mu_i * s.T) / q;
      break;
    }
    case ScheduleKind::Periodic: {
      // Sample one period of the periodic solution: exact decay between
      // grid points, trapezoidal release contribution on each sub-interval.
      double m = periodic_fixed_point(s, mu_i, dt);
      env.Mi_lower = env.Mi_upper = m;
      const long n = simpson_panels(s.T, dt);
      const double h = s.T / static_cast<double>(n);
      const double decay = std::exp(-mu_i * h);
      for (long k = 0; k < n; ++k) {
        const double t0 = h * static_cast<double>(k);
        const double u0 = s.profile_at(t0);
        const double u1 = s.profile_at(t0 + h);
        m = decay * m + 0.5 * h * (u0 * decay + u1);
        env.Mi_lower = std::min(env.Mi_lower, m);
        env.Mi_upper = std::max(env.Mi_upper, m);
      }
      break;
    }
  }
  return env;
}

ThresholdVerdict extinction_threshold_check(const ReleaseSchedule& s, const ModelParams& p,
                                            double dt) {
  if (!s.unbounded()) throw InvalidParameter("threshold check needs an unbounded schedule");
  double crit = 0.0;
  try {
    crit = mi_crit(p).value;
  } catch (const NoPositiveEquilibrium&) {
    return ThresholdVerdict::GloballyStable0;
  }
  const MiEnvelope env = mi_envelope(s, p.mu_i, dt);
  if (env.Mi_lower > crit) return ThresholdVerdict::GloballyStable0;
  if (env.Mi_upper < crit) return ThresholdVerdict::Bistable;
  return ThresholdVerdict::Inconclusive;
}

double sufficiency_scale(const ModelParams& p) {
  const Aggregates a = aggregates(p);
  if (!(a.N > 1.0)) {
    throw UnaidedCollapse(fmt::format("N = {:.6g} <= 1: the population collapses unaided", a.N));
  }
  const double c = 1.0 - 1.0 / a.N;
  return (1.0 - p.r) * p.nu_E * a.N / (4.0 * p.mu_M * p.gamma_i) * c * c * p.K;
}

double sufficient_impulse(double T, const ModelParams& p) {
  if (!(T > 0.0)) throw InvalidParameter("T must be positive");
  return sufficiency_scale(p) * std::expm1(p.mu_i * T);
}

double sufficient_period(double Lambda, const ModelParams& p) {
  if (!(Lambda > 0.0)) throw InvalidParameter("Lambda must be positive");
  return std::log1p(Lambda / sufficiency_scale(p)) / p.mu_i;
}

long min_release_count(const ReleaseSchedule& s, const ModelParams& p, double tau, double dt) {
  if (s.kind == ScheduleKind::Constant) throw InvalidParameter("release count needs a period");
  if (!(tau >= 0.0)) throw InvalidParameter("tau must be non-negative");
  const MiEnvelope env = mi_envelope(s, p.mu_i, dt);
  const double crit = mi_crit(p).value;
  if (!(env.Mi_lower > crit)) {
    throw NoGuarantee(fmt::format("lower sterile level {:.6g} does not exceed M_i^crit = {:.6g}",
                                  env.Mi_lower, crit));
  }
  // Guard against tau/T landing a hair above an integer through round-off.
  const double q = tau / s.T;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-12 * std::max(1.0, q)) return static_cast<long>(r);
  return static_cast<long>(std::ceil(q));
}

double lambda_for_phi(double phi, double T, const ModelParams& p) {
  if (!(phi > 0.0)) throw InvalidParameter("phi must be positive");
  if (!(T > 0.0)) throw InvalidParameter("T must be positive");
  const Aggregates a = aggregates(p);
  const double c = 1.0 - 1.0 / a.N;
  return p.K * phi * (1.0 - p.r) * p.nu_E * a.N / (4.0 * p.mu_M) * c * c *
         std::expm1(p.mu_i * T);
}

}  // namespace sitdyn
