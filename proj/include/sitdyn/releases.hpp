#pragma once

#include "sitdyn/params.hpp"
#include "sitdyn/schedule.hpp"

namespace sitdyn {

/// Range of the limiting sterile-male level under a schedule with unbounded
/// releases. For constant schedules lower = upper = limit.
struct MiEnvelope {
  double Mi_lower = 0.0;
  double Mi_upper = 0.0;
  double Mi_limit = 0.0;  ///< constant-schedule limit u0/mu_i; 0 otherwise
};

/// Envelope of the periodic limit of M_i. Periodic profiles are integrated by
/// composite Simpson and sampled at resolution dt.
MiEnvelope mi_envelope(const ReleaseSchedule& s, double mu_i, double dt = 0.1);

/// Initial value M_i(0) of the T-periodic solution under a periodic profile.
double periodic_fixed_point(const ReleaseSchedule& s, double mu_i, double dt = 0.1);

enum class ThresholdVerdict { GloballyStable0, Bistable, Inconclusive };

/// Compares the envelope with M_i^crit. Requires an unbounded schedule.
ThresholdVerdict extinction_threshold_check(const ReleaseSchedule& s, const ModelParams& p,
                                            double dt = 0.1);

/// S = (1 - r) nu_E N/(4 mu_M gamma_i) (1 - 1/N)^2 K, the lower impulsive
/// level that guarantees extinction. Throws UnaidedCollapse when N <= 1.
double sufficiency_scale(const ModelParams& p);

/// Smallest impulse Lambda = S (exp(mu_i T) - 1) guaranteeing extinction.
double sufficient_impulse(double T, const ModelParams& p);

/// Largest period T = log(1 + Lambda/S)/mu_i guaranteeing extinction.
double sufficient_period(double Lambda, const ModelParams& p);

/// ceil(tau / T) releases. Throws NoGuarantee when the lower envelope does
/// not exceed M_i^crit.
long min_release_count(const ReleaseSchedule& s, const ModelParams& p, double tau,
                       double dt = 0.1);

/// Lambda = K phi (1 - r) nu_E N/(4 mu_M) (1 - 1/N)^2 (exp(mu_i T) - 1).
double lambda_for_phi(double phi, double T, const ModelParams& p);

}  // namespace sitdyn
