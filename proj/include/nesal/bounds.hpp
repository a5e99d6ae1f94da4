#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nesal/rational.hpp"
#include "nesal/vc.hpp"

namespace nesal {

/// Closed interval; a missing end is infinite.
struct Interval {
  std::optional<Rational> lo;
  std::optional<Rational> hi;

  bool contains(const Rational& v) const { return (!lo || *lo <= v) && (!hi || v <= *hi); }
  bool empty() const { return lo && hi && *hi < *lo; }
  std::string str() const;

  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Phase { Undecided, Active, Inactive };

struct BoundsResult {
  std::vector<Interval> bounds;  // per solver variable
  std::vector<Phase> phases;     // per relu
  bool infeasible = false;       // some interval became empty
};

/// Interval propagation over the hard constraints, the relus and the
/// single-variable box of `vc`, plus any extra constraints that are known to
/// hold (e.g. asserted atoms). ReLUs whose pre-activation is provably
/// nonpositive / nonnegative get their phase fixed.
class BoundPropagator {
 public:
  explicit BoundPropagator(const VC& vc) : vc_(vc) {}

  /// Tightens `state` in place; returns false if an interval became empty.
  /// Constraint passes stop early once nothing changes.
  bool run(BoundsResult& state, const std::vector<const LinearConstraint*>& extra, int max_rounds) const;

 private:
  const VC& vc_;
};

BoundsResult initial_bounds(const VC& vc);

/// Sound interval bounds for every solver variable, with forced relu phases.
/// Without an input box every interval stays infinite, except X >= 0 for
/// relu outputs.
BoundsResult propagate_bounds(const VC& vc);

}  // namespace nesal
