#include "nesal/simplex.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace nesal {

Simplex::Simplex(std::size_t num_vars) {
  for (std::size_t i = 0; i < num_vars; ++i) add_variable();
}

VarId Simplex::add_variable() {
  value_.emplace_back();
  lower_.emplace_back();
  upper_.emplace_back();
  lower_reason_.emplace_back();
  upper_reason_.emplace_back();
  row_of_.push_back(-1);
  return value_.size() - 1;
}

const Rational* Simplex::coef_in(const Row& row, VarId v) const {
  auto it = std::lower_bound(row.entries.begin(), row.entries.end(), v,
                             [](const Entry& e, VarId x) { return e.var < x; });
  return (it != row.entries.end() && it->var == v) ? &it->coef : nullptr;
}

VarId Simplex::add_row(const std::vector<std::pair<Rational, VarId>>& terms) {
  const VarId slack = add_variable();
  make_row(slack, terms);
  return slack;
}

void Simplex::define(VarId v, const std::vector<std::pair<Rational, VarId>>& terms) {
  if (row_of_[v] >= 0 || lower_[v] || upper_[v]) throw std::logic_error("define: variable is already constrained");
  for (const auto& row : rows_)
    if (coef_in(row, v)) throw std::logic_error("define: variable already occurs in a row");
  make_row(v, terms);
}

void Simplex::make_row(VarId basic, const std::vector<std::pair<Rational, VarId>>& terms) {
  std::map<VarId, Rational> acc;
  for (const auto& [c, v] : terms) {
    if (c.is_zero()) continue;
    if (v == basic) throw std::logic_error("row defines a variable in terms of itself");
    if (row_of_[v] >= 0) {
      for (const auto& e : rows_[row_of_[v]].entries) acc[e.var] += c * e.coef;
    } else {
      acc[v] += c;
    }
  }
  Row row{basic, {}};
  DeltaRational val;
  for (auto& [v, c] : acc) {
    if (c.is_zero()) continue;
    val += c * value_[v];
    row.entries.push_back({v, std::move(c)});
  }
  value_[basic] = std::move(val);
  row_of_[basic] = static_cast<std::int64_t>(rows_.size());
  rows_.push_back(std::move(row));
}

bool Simplex::nudge(VarId v, const DeltaRational& target) {
  if (row_of_[v] >= 0 || value_[v] == target) return false;
  if ((lower_[v] && target < *lower_[v]) || (upper_[v] && *upper_[v] < target)) return false;
  update_nonbasic(v, target);
  return true;
}

void Simplex::push() { levels_.push_back(trail_.size()); }

void Simplex::pop() {
  const std::size_t mark = levels_.back();
  levels_.pop_back();
  while (trail_.size() > mark) {
    TrailEntry& t = trail_.back();
    if (t.upper) {
      upper_[t.var] = std::move(t.old_bound);
      upper_reason_[t.var] = std::move(t.old_reason);
    } else {
      lower_[t.var] = std::move(t.old_bound);
      lower_reason_[t.var] = std::move(t.old_reason);
    }
    trail_.pop_back();
  }
}

void Simplex::update_nonbasic(VarId v, const DeltaRational& target) {
  const DeltaRational theta = target - value_[v];
  for (auto& row : rows_)
    if (const Rational* c = coef_in(row, v)) value_[row.basic] += *c * theta;
  value_[v] = target;
}

bool Simplex::assert_upper(VarId v, const DeltaRational& b, BoundReason reason) {
  if (upper_[v] && *upper_[v] <= b) return true;
  if (lower_[v] && b < *lower_[v]) {
    conflict_.parts.clear();
    conflict_.parts.emplace_back(reason, Rational(1));
    conflict_.parts.emplace_back(lower_reason_[v], Rational(1));
    return false;
  }
  trail_.push_back({v, true, upper_[v], upper_reason_[v]});
  upper_[v] = b;
  upper_reason_[v] = std::move(reason);
  if (row_of_[v] < 0 && value_[v] > b) update_nonbasic(v, b);
  return true;
}

bool Simplex::assert_lower(VarId v, const DeltaRational& b, BoundReason reason) {
  if (lower_[v] && b <= *lower_[v]) return true;
  if (upper_[v] && *upper_[v] < b) {
    conflict_.parts.clear();
    conflict_.parts.emplace_back(reason, Rational(1));
    conflict_.parts.emplace_back(upper_reason_[v], Rational(1));
    return false;
  }
  trail_.push_back({v, false, lower_[v], lower_reason_[v]});
  lower_[v] = b;
  lower_reason_[v] = std::move(reason);
  if (row_of_[v] < 0 && value_[v] < b) update_nonbasic(v, b);
  return true;
}

void Simplex::pivot(std::size_t r, VarId entering) {
  Row& row = rows_[r];
  const VarId leaving = row.basic;
  const Rational a = *coef_in(row, entering);
  const Rational inv = Rational(1) / a;

  // entering = inv * leaving - sum_{j != entering} (a_j / a) x_j
  std::vector<Entry> fresh;
  fresh.reserve(row.entries.size());
  bool placed = false;
  for (auto& e : row.entries) {
    if (!placed && leaving < e.var) {
      fresh.push_back({leaving, inv});
      placed = true;
    }
    if (e.var == entering) continue;
    fresh.push_back({e.var, -(e.coef * inv)});
  }
  if (!placed) fresh.push_back({leaving, inv});
  row.entries = std::move(fresh);
  row.basic = entering;
  row_of_[entering] = static_cast<std::int64_t>(r);
  row_of_[leaving] = -1;

  const Row& pivot_row = rows_[r];
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    if (k == r) continue;
    Row& other = rows_[k];
    const Rational* cp = coef_in(other, entering);
    if (!cp) continue;
    const Rational c = *cp;
    std::vector<Entry> merged;
    merged.reserve(other.entries.size() + pivot_row.entries.size());
    auto i = other.entries.begin();
    auto j = pivot_row.entries.begin();
    while (i != other.entries.end() || j != pivot_row.entries.end()) {
      if (j == pivot_row.entries.end() || (i != other.entries.end() && i->var < j->var)) {
        if (i->var != entering) merged.push_back(std::move(*i));
        ++i;
      } else if (i == other.entries.end() || j->var < i->var) {
        merged.push_back({j->var, c * j->coef});
        ++j;
      } else {
        Rational sum = i->coef + c * j->coef;
        if (!sum.is_zero()) merged.push_back({i->var, std::move(sum)});
        ++i;
        ++j;
      }
    }
    other.entries = std::move(merged);
  }
  ++pivots_;
}

void Simplex::pivot_and_update(std::size_t r, VarId entering, const DeltaRational& target) {
  const VarId basic = rows_[r].basic;
  const Rational a = *coef_in(rows_[r], entering);
  const DeltaRational theta = (target - value_[basic]) / a;
  value_[basic] = target;
  value_[entering] += theta;
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    if (k == r) continue;
    if (const Rational* c = coef_in(rows_[k], entering)) value_[rows_[k].basic] += *c * theta;
  }
  pivot(r, entering);
}

void Simplex::explain_row(std::size_t r, bool below_lower) {
  conflict_.parts.clear();
  const Row& row = rows_[r];
  if (below_lower) {
    conflict_.parts.emplace_back(lower_reason_[row.basic], Rational(1));
    for (const auto& e : row.entries) {
      if (e.coef.sign() > 0) {
        conflict_.parts.emplace_back(upper_reason_[e.var], e.coef);
      } else {
        conflict_.parts.emplace_back(lower_reason_[e.var], -e.coef);
      }
    }
  } else {
    conflict_.parts.emplace_back(upper_reason_[row.basic], Rational(1));
    for (const auto& e : row.entries) {
      if (e.coef.sign() > 0) {
        conflict_.parts.emplace_back(lower_reason_[e.var], e.coef);
      } else {
        conflict_.parts.emplace_back(upper_reason_[e.var], -e.coef);
      }
    }
  }
}

Simplex::Status Simplex::check(const std::function<bool()>& interrupted) {
  for (std::uint64_t iter = 0;; ++iter) {
    if (interrupted && (iter & 7) == 0 && interrupted()) return Status::Interrupted;

    // Bland: smallest violating basic variable
    std::int64_t chosen = -1;
    bool below = false;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const VarId b = rows_[r].basic;
      if (chosen >= 0 && b >= rows_[chosen].basic) continue;
      if (lower_[b] && value_[b] < *lower_[b]) {
        chosen = static_cast<std::int64_t>(r);
        below = true;
      } else if (upper_[b] && value_[b] > *upper_[b]) {
        chosen = static_cast<std::int64_t>(r);
        below = false;
      }
    }
    if (chosen < 0) return Status::Feasible;

    const Row& row = rows_[chosen];
    const VarId b = row.basic;
    // Bland: entries are sorted, so the first suitable one has the smallest index
    std::optional<VarId> entering;
    for (const auto& e : row.entries) {
      const bool increase = (e.coef.sign() > 0) == below;
      if (increase ? (!upper_[e.var] || value_[e.var] < *upper_[e.var])
                   : (!lower_[e.var] || value_[e.var] > *lower_[e.var])) {
        entering = e.var;
        break;
      }
    }
    if (!entering) {
      explain_row(static_cast<std::size_t>(chosen), below);
      return Status::Infeasible;
    }
    const DeltaRational target = below ? *lower_[b] : *upper_[b];
    pivot_and_update(static_cast<std::size_t>(chosen), *entering, target);
  }
}

Rational Simplex::concrete_delta(const std::vector<std::pair<DeltaRational, DeltaRational>>& extra) const {
  Rational delta(1);
  auto consider = [&](const DeltaRational& lo, const DeltaRational& hi) {
    if (lo.real < hi.real && lo.delta > hi.delta) {
      Rational limit = (hi.real - lo.real) / (lo.delta - hi.delta);
      if (limit < delta) delta = limit;
    }
  };
  for (VarId v = 0; v < value_.size(); ++v) {
    if (lower_[v]) consider(*lower_[v], value_[v]);
    if (upper_[v]) consider(value_[v], *upper_[v]);
  }
  for (const auto& [lo, hi] : extra) consider(lo, hi);
  return delta / Rational(2);
}

std::vector<Rational> Simplex::concrete_values(const Rational& delta) const {
  std::vector<Rational> out;
  out.reserve(value_.size());
  for (const auto& v : value_) out.push_back(v.concretize(delta));
  return out;
}

SimplexCheckResult simplex_check(std::size_t num_vars, const std::vector<LinearConstraint>& constraints,
                                 const std::vector<VarBound>& bounds) {
  SimplexCheckResult result;
  result.constraints = constraints;
  for (const auto& b : bounds) {
    // x <= v  or  -x <= -v
    const Rational sign = b.upper ? Rational(1) : Rational(-1);
    result.constraints.push_back(
        LinearConstraint::make({{sign, b.var}}, b.strict ? RelOp::Lt : RelOp::Le, sign * b.value));
  }
  const auto& all = result.constraints;
  std::size_t n = num_vars;
  for (const auto& c : all)
    for (const auto& [_, v] : c.terms) n = std::max(n, v + 1);

  auto infeasible_from = [&](const Explanation& ex) {
    result.feasible = false;
    result.certificate.assign(all.size(), Rational());
    for (const auto& [reason, mu] : ex.parts)
      if (reason.source >= 0) result.certificate[reason.source] += mu * reason.scale;
    return result;
  };

  Simplex simplex(n);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const LinearConstraint& c = all[k];
    const auto src = static_cast<std::int64_t>(k);
    const DeltaRational strict_rhs = c.op == RelOp::Lt ? DeltaRational(c.rhs, Rational(-1)) : DeltaRational(c.rhs);
    if (c.terms.empty()) {
      const bool ok = c.op == RelOp::Le ? Rational() <= c.rhs
                                        : (c.op == RelOp::Lt ? Rational() < c.rhs : c.rhs.is_zero());
      if (ok) continue;
      Explanation ex;
      const Rational lambda = (c.op == RelOp::Eq && c.rhs.sign() > 0) ? Rational(-1) : Rational(1);
      ex.parts.push_back({BoundReason{src, lambda}, Rational(1)});
      return infeasible_from(ex);
    }
    VarId target;
    Rational a(1);
    if (c.terms.size() == 1) {
      target = c.terms.front().second;
      a = c.terms.front().first;
    } else {
      target = simplex.add_row(c.terms);
    }
    // a * target op rhs
    const DeltaRational bound = strict_rhs / a;
    bool ok = true;
    if (c.op == RelOp::Eq) {
      ok = simplex.assert_upper(target, bound, {src, Rational(1) / a}) &&
           simplex.assert_lower(target, bound, {src, Rational(-1) / a});
    } else if (a.sign() > 0) {
      ok = simplex.assert_upper(target, bound, {src, Rational(1) / a});
    } else {
      ok = simplex.assert_lower(target, bound, {src, Rational(-1) / a});
    }
    if (!ok) return infeasible_from(simplex.explanation());
  }
  if (simplex.check() == Simplex::Status::Infeasible) return infeasible_from(simplex.explanation());
  result.feasible = true;
  auto values = simplex.concrete_values(simplex.concrete_delta());
  values.resize(num_vars);
  result.model = std::move(values);
  return result;
}

bool verify_farkas(const std::vector<LinearConstraint>& constraints, const std::vector<Rational>& multipliers) {
  if (multipliers.size() != constraints.size()) return false;
  std::map<VarId, Rational> combined;
  Rational rhs;
  bool strict = false;
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const Rational& lambda = multipliers[k];
    if (lambda.is_zero()) continue;
    const LinearConstraint& c = constraints[k];
    if (c.op != RelOp::Eq && lambda.sign() < 0) return false;
    if (c.op == RelOp::Lt) strict = true;
    for (const auto& [coef, v] : c.terms) combined[v] += lambda * coef;
    rhs += lambda * c.rhs;
  }
  for (const auto& [_, coef] : combined)
    if (!coef.is_zero()) return false;
  return rhs.sign() < 0 || (rhs.is_zero() && strict);
}

}  // namespace nesal
