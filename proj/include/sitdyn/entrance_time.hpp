#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sitdyn/dynamics.hpp"
#include "sitdyn/params.hpp"
#include "sitdyn/schedule.hpp"
#include "sitdyn/separatrix.hpp"

namespace sitdyn {

/// Quantities behind the closed-form entrance-time bounds, exposed for audit.
/// With a = nu_E + mu_E and d = a - mu_F, the linear comparison system has
/// eigenvalues kappa_pm and eigenvectors (1, x_pm); the comparison solution
/// starts at the upper bound of E_+.
struct AnalyticBoundContext {
  double N = 0.0;
  double psi = 0.0;
  double Z = 0.0;
  double Z0 = 0.0;
  double sigma = 0.0;    ///< sign of nu_E + mu_E - mu_F (0 when equal)
  double sigma_E = 0.0;  ///< mu_M/(nu_E + mu_E)
  double sigma_F = 0.0;  ///< mu_M/mu_F
  double eps = 0.0;      ///< M_+^*/(M_+^* + M_i)
  double g_eps = 0.0;    ///< infinite when sigma_E = sigma_F
  double G = 0.0;        ///< g(eps) sigma (sigma_F - sigma_E), finite in all cases
  double Gd = 0.0;       ///< sqrt(d^2 + 4 b r nu_E eps)
  double kappa_plus = 0.0;
  double kappa_minus = 0.0;
  double x_plus = 0.0;
  double x_minus = 0.0;
  double r0_plus = 0.0;
  double r0_minus = 0.0;
  double s0_plus = 0.0;
  double s0_minus = 0.0;
  double r_tilde_plus = 0.0;
  double r_tilde_minus = 0.0;
  double alpha = 0.0;
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double rate_E = 0.0;  ///< nu_E + mu_E
  double mu_F = 0.0;
  double mu_M = 0.0;
  double c_coef = 0.0;  ///< (2N - 1)(nu_E + mu_E) + mu_F
  State3 start{};       ///< upper bound of E_+ used as initial data
};

/// Context at sterile level M_i (eps from the exact M_+^* at M_i = 0).
AnalyticBoundContext analytic_context(double Mi, const ModelParams& p);

/// Context for a given eps in (0, 1).
AnalyticBoundContext analytic_context_eps(double eps, const ModelParams& p);

struct TComponents {
  double t_E = 0.0;
  double t_F = 0.0;
  double t_M = 0.0;
  [[nodiscard]] double max() const;
};

/// Times after which each comparison component drops below the lower bound of
/// E_-. Throws NotApplicable when r0_- >= 0, eps >= 1/N, or mu_M falls in
/// the gap between the two treated cases.
TComponents t_components(const AnalyticBoundContext& ctx);

/// Lower bound on the entrance time valid for every M_i. Requires N > F(psi).
double tau_lower_bound(const ModelParams& p);

struct UpperBound {
  std::optional<double> days;
  std::vector<std::string> failed;  ///< violated applicability conditions
};

/// Closed-form upper bound on the entrance time at level M_i.
UpperBound tau_upper_bound(double Mi, const ModelParams& p);

/// Same bound for an explicit eps.
UpperBound tau_upper_bound_eps(double eps, const ModelParams& p);

/// One-step condition rho > N - 1 under which the closed-form bound exists.
bool one_step_condition(double rho, const ModelParams& p);

/// Two-step feasibility rho ((rho + 1) mu_M/((1 - r) nu_E) + N - 1) > N - 1.
/// Only the predicate is provided; no bound is derived from it.
bool two_step_condition(double rho, const ModelParams& p);

struct EntranceTime {
  bool entered = false;
  double t = 0.0;  ///< days; meaningful when entered
  long steps = 0;
};

/// Reduced model from E_+(M_i = 0) at constant level M_i until the state is
/// below the separatrix described by `tree`. Checked at every step.
EntranceTime tau_numeric(double Mi, const ModelParams& p, const DominanceTree& tree,
                         double dt = 0.1, long max_steps = 300000);

struct ControlledEntrance {
  bool entered = false;
  double t_star = 0.0;
  long n_tot = 0;            ///< floor(t_star / T) for periodic and impulsive schedules
  double rho_tot = 0.0;      ///< released males over M_+^*
  double female_ratio = 0.0; ///< (F + Fst)(t_star)/(F^* + Fst^*); needs with_Fst
  long steps = 0;
};

/// Controlled model from E_+(M_i = 0), sterile level s.Mi0, and the
/// pre-release sterile-female equilibrium, until the wild state is below
/// the separatrix. The first impulse, if any, is released at t = 0.
ControlledEntrance entrance_time_controlled(const ReleaseSchedule& s, const ModelParams& p,
                                            const DominanceTree& tree, bool with_Fst = true,
                                            double dt = 0.1, long max_steps = 300000);

/// Constant-release total effort (M_i/M_+^*) mu_i t.
double constant_total_effort(double Mi, double t, const ModelParams& p);

}  // namespace sitdyn
