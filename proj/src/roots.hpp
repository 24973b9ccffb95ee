#pragma once

// Scalar root and extremum helpers shared by the numerical modules.

#include <cmath>
#include <utility>

#include "sitdyn/error.hpp"

namespace sitdyn::detail {

/// Bisection on a sign change of fn over [lo, hi]. Stops when the bracket is
/// narrower than tol or when the midpoint can no longer split it.
template <class Fn>
double bisect(Fn&& fn, double lo, double hi, double tol, const char* what) {
  double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0) || std::isnan(flo) || std::isnan(fhi)) {
    throw NumericFailure(std::string("bracket without sign change: ") + what);
  }
  for (int it = 0; it < 2000 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section search for the maximum of a unimodal fn on [a, b].
template <class Fn>
std::pair<double, double> golden_max(Fn&& fn, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  for (int it = 0; it < 500 && b - a > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = fn(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace sitdyn::detail
