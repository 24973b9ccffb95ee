#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sitdyn/params.hpp"
#include "sitdyn/schedule.hpp"
#include "sitdyn/state.hpp"

namespace sitdyn {

/// Fraction of emerging females fertilised by wild males:
/// (1 - exp(-beta T)) M / T with T = M + gamma_i M_i, and 0 when T = 0.
double fertile_fraction(double M, double Mi, const ModelParams& p);

/// Fraction mated by sterile males or left unmated:
/// exp(-beta T) + gamma_i M_i / T (1 - exp(-beta T)), and 1 when T = 0.
double sterile_fraction(double M, double Mi, const ModelParams& p);

/// Full model with the larval compartment at constant sterile level M_i.
State5 rhs_full(const State5& s, double Mi, const ModelParams& p);

/// Reduced model at constant sterile level M_i.
State3 rhs_simplified(const State3& s, double Mi, const ModelParams& p);

/// Controlled model with release rate u; Fst is a passive diagnostic.
State4 rhs_controlled(const State4& s, double u, const ModelParams& p);

/// Nonstandard finite-difference settings. phi_dt = (1 - exp(-Q dt))/Q.
struct NsfdConfig {
  double dt = 0.1;
  double Q = 0.0;
  double phi_dt = 0.0;
  long max_steps = 300000;
};

/// Q = max(mu_M, mu_F, nu_E + mu_E), plus mu_i when `controlled` is set.
NsfdConfig make_nsfd_config(const ModelParams& p, double dt = 0.1, bool controlled = true,
                            long max_steps = 300000);

/// One NSFD step of the controlled model with release rate u_n.
State4 nsfd_step(const State4& s, double u, const NsfdConfig& cfg, const ModelParams& p);

/// One NSFD step of the reduced model with M_i held at a constant level.
State3 nsfd_step(const State3& s, double Mi, const NsfdConfig& cfg, const ModelParams& p);

enum class StopReason { Condition, MaxSteps };

struct TrajectoryEvent {
  double t = 0.0;
  std::string kind;  ///< "impulse", "stop" or "max_steps"
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State4> states;
  std::vector<TrajectoryEvent> events;
  StopReason reason = StopReason::MaxSteps;
  long steps = 0;
  bool has_Fst = false;
};

using StopPredicate = std::function<bool(double t, const State4& s)>;

/// Iterates nsfd_step from s0 under the schedule. The sterile compartment
/// starts at s0.Mi; impulses are exact jumps applied at t = nT. States are
/// recorded every `stride` steps plus the final one. Stops when `stop`
/// returns true or after cfg.max_steps steps.
Trajectory simulate(const State4& s0, const ReleaseSchedule& schedule, const NsfdConfig& cfg,
                    const ModelParams& p, const StopPredicate& stop = {}, long stride = 1,
                    bool track_Fst = true);

/// CSV with header t,E,M,Mi,F[,Fst].
void write_trajectory_csv(const Trajectory& tr, std::ostream& os);

using VectorField = std::function<std::vector<double>(double t, const std::vector<double>& x)>;

struct ReferenceTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  long steps_per_record = 0;
};

/// Classical fourth-order Runge-Kutta at a uniform step, halved until the
/// endpoint moves by less than tol (relative sup-norm). States are returned
/// at multiples of record_dt, which must divide the horizon. Tiny negative
/// round-off is clamped to 0. Throws NumericFailure past max_steps.
ReferenceTrajectory reference_integrate(const VectorField& rhs, const std::vector<double>& s0,
                                        double horizon, double tol, double record_dt,
                                        long max_steps = 1L << 26);

}  // namespace sitdyn
