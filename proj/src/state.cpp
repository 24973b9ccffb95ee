#include "sitdyn/state.hpp"

#include "sitdyn/error.hpp"

namespace sitdyn {

Relation partial_order(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidParameter("partial_order: dimension mismatch");
  bool all_leq = true, all_lt = true, all_geq = true, all_gt = true, equal = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_leq = all_leq && a[i] <= b[i];
    all_lt = all_lt && a[i] < b[i];
    all_geq = all_geq && a[i] >= b[i];
    all_gt = all_gt && a[i] > b[i];
    equal = equal && a[i] == b[i];
  }
  if (equal) return Relation::Equal;
  if (all_lt) return Relation::LL;
  if (all_leq) return Relation::LT;
  if (all_gt) return Relation::GG;
  if (all_geq) return Relation::GT;
  return Relation::Incomparable;
}

}  // namespace sitdyn
