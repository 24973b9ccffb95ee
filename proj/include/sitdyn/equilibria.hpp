#pragma once

#include <optional>

#include "sitdyn/params.hpp"
#include "sitdyn/state.hpp"

namespace sitdyn {

/// f(x, y) = x (1 - psi x)(1 - exp(-(x + y))) - (x + y)/N, with x = beta M and
/// y = beta gamma_i M_i. Positive steady states are the positive x-roots.
double f_characteristic(double x, double y, double N, double psi);

/// First and second x-derivatives of f_characteristic.
double f_dx(double x, double y, double N, double psi);
double f_dxx(double x, double y, double N, double psi);

/// s0 = -log(theta0), where theta0 solves 1 - theta = -xi log(theta).
/// Working with s avoids underflow: theta0 is about exp(-1/xi) for small xi.
/// Throws NoPositiveEquilibrium when xi >= 1.
double theta0_log(double xi);

/// theta0 itself; may underflow to 0 for very small xi.
double theta0(double xi);

struct HPair {
  double minus = 0.0;
  double plus = 0.0;
};

/// h_-(theta), h_+(theta) on (theta0, 1]. Throws InvalidParameter outside.
HPair h_pm(double theta, double N, double psi);

/// Same functions parametrised by s = -log(theta) in [0, s0].
HPair h_pm_log(double s, double N, double psi);

struct MiCrit {
  double value = 0.0;           ///< M_i^crit in individuals (negative when N <= 1)
  double upper_estimate = 0.0;  ///< y~/(gamma_i beta), always >= value
  double s_argmax = 0.0;        ///< -log(theta) at the maximiser of h_+
};

/// Critical sterile-male level above which 0 is the only steady state.
/// Throws NoPositiveEquilibrium when N <= 4 psi.
MiCrit mi_crit(const ModelParams& p);

/// Sterile level (N - 1) M_+^* / gamma_i at which the linear comparison
/// system used for the closed-form upper bound starts to decay.
double one_step_effort_level(const ModelParams& p);

enum class Stability { Stable, Unstable };

struct SteadyStateSet {
  State3 zero{};
  std::optional<State3> E_minus;
  std::optional<State3> E_plus;
  std::optional<double> M_minus;
  std::optional<double> M_plus;
  Stability zero_stability = Stability::Stable;
  std::optional<Stability> minus_stability;
  std::optional<Stability> plus_stability;

  [[nodiscard]] int positive_count() const {
    return static_cast<int>(E_minus.has_value()) + static_cast<int>(E_plus.has_value());
  }
};

/// All steady states of the reduced model at constant sterile level M_i.
/// The single-root (saddle-node) case is stored in E_plus only.
SteadyStateSet steady_states(double Mi, const ModelParams& p);

/// Positive equilibrium state for a male coordinate M (no root check).
State3 state_from_male(double M, const ModelParams& p);

/// Local stability of a steady state at level M_i. Throws InvalidParameter
/// when the state is not a steady state (relative residual above 1e-6).
Stability classify_stability(const State3& s, double Mi, const ModelParams& p);

/// Root of exp(-Z)(1 + psi - psi Z) = psi on (0, 1/(2 psi)).
double Z_psi(double psi);

/// F(psi) = (1 + psi - psi Z)/(1 - psi Z)^2.
double F_psi(double psi);

struct EquilibriumBounds {
  State3 under_E_minus{};
  State3 over_E_minus{};
  State3 under_E_plus{};
  State3 over_E_plus{};
  double Z = 0.0;
  double F_psi = 0.0;
  double kappa_star = 0.0;   ///< upper kappa (bounds E_- from above)
  double kappa_lower = 0.0;  ///< lower kappa (bounds E_+ from below)
};

/// Closed-form brackets of E_- and E_+ at M_i = 0. Requires N > 2 and
/// N > F(psi); throws NoPositiveEquilibrium otherwise.
EquilibriumBounds equilibrium_bounds(const ModelParams& p);

}  // namespace sitdyn
