#include "sitdyn/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "sitdyn/error.hpp"

namespace sitdyn {

ReleaseSchedule ReleaseSchedule::constant(double u0, double Mi0) {
  ReleaseSchedule s;
  s.kind = ScheduleKind::Constant;
  s.u0 = u0;
  s.Mi0 = Mi0;
  s.validate();
  return s;
}

ReleaseSchedule ReleaseSchedule::periodic(double T, std::vector<std::pair<double, double>> profile,
                                          std::optional<long> N_r, double Mi0) {
  ReleaseSchedule s;
  s.kind = ScheduleKind::Periodic;
  s.T = T;
  s.profile = std::move(profile);
  std::sort(s.profile.begin(), s.profile.end());
  s.N_r = N_r;
  s.Mi0 = Mi0;
  s.validate();
  return s;
}

ReleaseSchedule ReleaseSchedule::impulsive(double Lambda, double T, std::optional<long> N_r,
                                           double Mi0) {
  ReleaseSchedule s;
  s.kind = ScheduleKind::Impulsive;
  s.Lambda = Lambda;
  s.T = T;
  s.N_r = N_r;
  s.Mi0 = Mi0;
  s.validate();
  return s;
}

void ReleaseSchedule::validate() const {
  if (!(Mi0 >= 0.0)) throw InvalidParameter("Mi0 must be non-negative");
  if (N_r && *N_r < 0) throw InvalidParameter("N_r must be non-negative");
  switch (kind) {
    case ScheduleKind::Constant:
      if (!(u0 >= 0.0)) throw InvalidParameter("u0 must be non-negative");
      break;
    case ScheduleKind::Periodic:
      if (!(T > 0.0)) throw InvalidParameter("period T must be positive");
      if (profile.empty()) throw InvalidParameter("periodic profile is empty");
      for (const auto& [t, v] : profile) {
        if (!(t >= 0.0 && t <= T)) throw InvalidParameter("profile time outside [0, T]");
        if (!(v >= 0.0)) throw InvalidParameter("profile values must be non-negative");
      }
      break;
    case ScheduleKind::Impulsive:
      if (!(T > 0.0)) throw InvalidParameter("period T must be positive");
      if (!(Lambda >= 0.0)) throw InvalidParameter("Lambda must be non-negative");
      break;
  }
}

double ReleaseSchedule::profile_at(double s) const {
  if (profile.empty()) return 0.0;
  if (s <= profile.front().first) return profile.front().second;
  if (s >= profile.back().first) return profile.back().second;
  auto it = std::upper_bound(profile.begin(), profile.end(), s,
                             [](double v, const auto& knot) { return v < knot.first; });
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  if (t1 == t0) return v1;
  return v0 + (v1 - v0) * (s - t0) / (t1 - t0);
}

double ReleaseSchedule::rate(double t) const {
  switch (kind) {
    case ScheduleKind::Constant:
      return u0;
    case ScheduleKind::Periodic: {
      if (t < 0.0) return 0.0;
      const double n = std::floor(t / T);
      if (N_r && n >= static_cast<double>(*N_r)) return 0.0;
      return profile_at(t - n * T);
    }
    case ScheduleKind::Impulsive:
      return 0.0;
  }
  return 0.0;
}

}  // namespace sitdyn
