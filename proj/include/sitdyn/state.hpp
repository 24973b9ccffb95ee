#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace sitdyn {

/// Reduced model state: eggs, fertile males, fertile females.
struct State3 {
  double E = 0.0;
  double M = 0.0;
  double F = 0.0;

  [[nodiscard]] std::array<double, 3> array() const { return {E, M, F}; }
  static State3 from(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }
  friend bool operator==(const State3&, const State3&) = default;
};

/// Controlled model state. Fst (sterile females) is a passive diagnostic:
/// it never feeds back into the other compartments.
struct State4 {
  double E = 0.0;
  double M = 0.0;
  double Mi = 0.0;
  double F = 0.0;
  double Fst = 0.0;

  [[nodiscard]] State3 wild() const { return {E, M, F}; }
  [[nodiscard]] std::array<double, 5> array() const { return {E, M, Mi, F, Fst}; }
  friend bool operator==(const State4&, const State4&) = default;
};

/// Full model state with the larval compartment.
struct State5 {
  double E = 0.0;
  double L = 0.0;
  double M = 0.0;
  double F = 0.0;
  double Fst = 0.0;

  [[nodiscard]] std::array<double, 5> array() const { return {E, L, M, F, Fst}; }
  friend bool operator==(const State5&, const State5&) = default;
};

/// Strongest componentwise relation of a to b.
///   LL: a << b (every coordinate strictly smaller)
///   LT: a <  b (a <= b, a != b, not LL)
///   GG / GT: the mirrored relations
/// a <= b holds exactly for Equal, LT and LL.
enum class Relation { Equal, LL, LT, GG, GT, Incomparable };

/// Throws InvalidParameter on dimension mismatch.
Relation partial_order(std::span<const double> a, std::span<const double> b);

inline Relation partial_order(const State3& a, const State3& b) {
  const auto x = a.array();
  const auto y = b.array();
  return partial_order(std::span<const double>(x), std::span<const double>(y));
}

inline bool leq(const State3& a, const State3& b) {
  return a.E <= b.E && a.M <= b.M && a.F <= b.F;
}

inline bool strictly_less(const State3& a, const State3& b) {
  return a.E < b.E && a.M < b.M && a.F < b.F;
}

inline State3 operator*(double s, const State3& x) { return {s * x.E, s * x.M, s * x.F}; }

}  // namespace sitdyn
