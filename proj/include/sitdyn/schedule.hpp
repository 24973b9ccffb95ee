#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace sitdyn {

enum class ScheduleKind { Constant, Periodic, Impulsive };

/// Sterile-male release protocol. Constant releases u0 males/day forever;
/// periodic releases repeat the profile u0(t) on [0, T) for N_r periods;
/// impulsive releases add Lambda males at t = nT for n < N_r. N_r empty
/// means unbounded.
struct ReleaseSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double u0 = 0.0;
  double T = 0.0;
  /// Periodic profile knots (t, u) with 0 <= t <= T, interpolated linearly
  /// and held constant outside the first and last knot.
  std::vector<std::pair<double, double>> profile;
  double Lambda = 0.0;
  std::optional<long> N_r;
  double Mi0 = 0.0;

  static ReleaseSchedule constant(double u0, double Mi0 = 0.0);
  static ReleaseSchedule periodic(double T, std::vector<std::pair<double, double>> profile,
                                  std::optional<long> N_r = std::nullopt, double Mi0 = 0.0);
  static ReleaseSchedule impulsive(double Lambda, double T, std::optional<long> N_r = std::nullopt,
                                   double Mi0 = 0.0);

  void validate() const;

  /// Value of the periodic profile at phase s in [0, T).
  [[nodiscard]] double profile_at(double s) const;

  /// Continuous release rate u(t) in males/day (0 for impulsive schedules).
  [[nodiscard]] double rate(double t) const;

  /// True when no release count limit applies.
  [[nodiscard]] bool unbounded() const { return !N_r.has_value(); }
};

}  // namespace sitdyn
