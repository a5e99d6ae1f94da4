#include "nesal/bounds.hpp"

namespace nesal {

std::string Interval::str() const {
  return "[" + (lo ? lo->str() : std::string("-inf")) + ", " + (hi ? hi->str() : std::string("+inf")) + "]";
}

namespace {

bool tighten_hi(Interval& iv, const Rational& v) {
  if (iv.hi && *iv.hi <= v) return false;
  iv.hi = v;
  return true;
}

bool tighten_lo(Interval& iv, const Rational& v) {
  if (iv.lo && *iv.lo >= v) return false;
  iv.lo = v;
  return true;
}

// sum(a_i v_i) <= rhs; returns whether anything changed
bool propagate_le(const std::vector<std::pair<Rational, VarId>>& terms, const Rational& rhs, Rational sign,
                  std::vector<Interval>& b) {
  // minimum of sign * a_i * v_i over the box
  Rational finite_sum;
  std::size_t infinite = 0;
  std::vector<std::optional<Rational>> mins;
  mins.reserve(terms.size());
  for (const auto& [coef, v] : terms) {
    const Rational a = sign * coef;
    const auto& end = a.sign() > 0 ? b[v].lo : b[v].hi;
    if (end) {
      Rational m = a * *end;
      finite_sum += m;
      mins.emplace_back(std::move(m));
    } else {
      ++infinite;
      mins.emplace_back(std::nullopt);
    }
  }
  if (infinite > 1) return false;
  const Rational r = sign * rhs;
  bool changed = false;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (infinite == 1 && mins[j]) continue;
    const Rational others = mins[j] ? finite_sum - *mins[j] : finite_sum;
    const Rational a = sign * terms[j].first;
    const Rational limit = (r - others) / a;
    changed |= a.sign() > 0 ? tighten_hi(b[terms[j].second], limit) : tighten_lo(b[terms[j].second], limit);
  }
  return changed;
}

bool propagate_constraint(const LinearConstraint& c, std::vector<Interval>& b) {
  bool changed = propagate_le(c.terms, c.rhs, Rational(1), b);
  if (c.op == RelOp::Eq) changed |= propagate_le(c.terms, c.rhs, Rational(-1), b);
  return changed;
}

bool propagate_relu(const ReluConstraint& r, Phase& phase, std::vector<Interval>& b) {
  Interval& y = b[r.pre];
  Interval& x = b[r.post];
  bool changed = tighten_lo(x, Rational());
  if (phase == Phase::Undecided) {
    if (y.hi && y.hi->sign() <= 0) {
      phase = Phase::Inactive;
      changed = true;
    } else if ((y.lo && y.lo->sign() >= 0) || (x.lo && x.lo->sign() > 0)) {
      phase = Phase::Active;
      changed = true;
    }
  }
  switch (phase) {
    case Phase::Inactive:
      changed |= tighten_hi(x, Rational());
      changed |= tighten_hi(y, Rational());
      break;
    case Phase::Active:
      changed |= tighten_lo(y, Rational());
      if (y.lo) changed |= tighten_lo(x, *y.lo);
      if (y.hi) changed |= tighten_hi(x, *y.hi);
      if (x.lo) changed |= tighten_lo(y, *x.lo);
      if (x.hi) changed |= tighten_hi(y, *x.hi);
      break;
    case Phase::Undecided:
      if (y.lo) changed |= tighten_lo(x, max(Rational(), *y.lo));
      if (y.hi) changed |= tighten_hi(x, max(Rational(), *y.hi));
      // post >= pre
      if (x.hi) changed |= tighten_hi(y, *x.hi);
      break;
  }
  return changed;
}

}  // namespace

bool BoundPropagator::run(BoundsResult& state, const std::vector<const LinearConstraint*>& extra,
                          int max_rounds) const {
  auto& b = state.bounds;
  // relus are visited right after the equation defining their pre-activation
  std::vector<std::vector<std::size_t>> relus_after(vc_.num_vars());
  for (std::size_t r = 0; r < vc_.relus.size(); ++r) relus_after[vc_.relus[r].pre].push_back(r);

  for (int round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (const auto* c : extra) changed |= propagate_constraint(*c, b);
    for (const auto& c : vc_.hard) {
      changed |= propagate_constraint(c, b);
      for (const auto& [_, v] : c.terms)
        for (std::size_t r : relus_after[v]) changed |= propagate_relu(vc_.relus[r], state.phases[r], b);
    }
    for (std::size_t r = 0; r < vc_.relus.size(); ++r)
      changed |= propagate_relu(vc_.relus[r], state.phases[r], b);
    for (const auto& iv : b)
      if (iv.empty()) {
        state.infeasible = true;
        return false;
      }
    if (!changed) break;
  }
  return true;
}

BoundsResult initial_bounds(const VC& vc) {
  BoundsResult state;
  state.bounds.resize(vc.num_vars());
  for (VarId v = 0; v < vc.num_vars(); ++v) {
    if (v < vc.box_lower.size()) state.bounds[v].lo = vc.box_lower[v];
    if (v < vc.box_upper.size()) state.bounds[v].hi = vc.box_upper[v];
  }
  state.phases.assign(vc.relus.size(), Phase::Undecided);
  return state;
}

BoundsResult propagate_bounds(const VC& vc) {
  BoundsResult state = initial_bounds(vc);
  BoundPropagator(vc).run(state, {}, 4);
  return state;
}

}  // namespace nesal
