#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nesal/rational.hpp"
#include "nesal/vc.hpp"

namespace nesal {

/// Identifies the constraint a bound was derived from: the bound
/// `sigma * x <= sigma * b` equals `scale` times constraint `source`.
struct BoundReason {
  std::int64_t source = -1;  // -1: not tracked
  Rational scale;
};

/// Nonnegative combination of bounds (each with its reason) that sums to a
/// contradiction.
struct Explanation {
  std::vector<std::pair<BoundReason, Rational>> parts;
};

/// Incremental general-form simplex over exact delta-rationals. Rows are
/// slack definitions s = sum(a_i x_i); bounds can be asserted and retracted
/// with push/pop. Pivoting follows Bland's rule, so check() terminates.
class Simplex {
 public:
  explicit Simplex(std::size_t num_vars = 0);

  VarId add_variable();
  /// Adds slack = sum(terms) and returns the slack variable.
  VarId add_row(const std::vector<std::pair<Rational, VarId>>& terms);
  /// Makes `v` basic with v = sum(terms). `v` must not be bounded or occur
  /// in any row yet.
  void define(VarId v, const std::vector<std::pair<Rational, VarId>>& terms);

  std::size_t num_vars() const { return value_.size(); }

  /// Returns false on an immediate bound conflict (see explanation()).
  bool assert_lower(VarId v, const DeltaRational& b, BoundReason reason = {});
  bool assert_upper(VarId v, const DeltaRational& b, BoundReason reason = {});

  /// Moves a nonbasic variable to `target` if that keeps its bounds; used to
  /// pick a good starting point. Returns whether the value changed.
  bool nudge(VarId v, const DeltaRational& target);

  void push();
  void pop();
  std::size_t level() const { return levels_.size(); }

  enum class Status { Feasible, Infeasible, Interrupted };
  /// `interrupted` is polled between pivots.
  Status check(const std::function<bool()>& interrupted = {});

  const DeltaRational& value(VarId v) const { return value_[v]; }
  const std::optional<DeltaRational>& lower(VarId v) const { return lower_[v]; }
  const std::optional<DeltaRational>& upper(VarId v) const { return upper_[v]; }

  /// Contradiction found by the last failed assert or check.
  const Explanation& explanation() const { return conflict_; }

  /// Half the largest delta value <= 1 for which the concretized assignment
  /// keeps every bound and every extra (lhs <= rhs) pair.
  Rational concrete_delta(const std::vector<std::pair<DeltaRational, DeltaRational>>& extra = {}) const;
  std::vector<Rational> concrete_values(const Rational& delta) const;

  std::uint64_t pivots() const { return pivots_; }

 private:
  struct Entry {
    VarId var;
    Rational coef;
  };
  struct Row {
    VarId basic;
    std::vector<Entry> entries;  // sorted by var, nonbasic vars only
  };
  struct TrailEntry {
    VarId var;
    bool upper;
    std::optional<DeltaRational> old_bound;
    BoundReason old_reason;
  };

  void make_row(VarId basic, const std::vector<std::pair<Rational, VarId>>& terms);
  const Rational* coef_in(const Row& row, VarId v) const;
  void update_nonbasic(VarId v, const DeltaRational& target);
  void pivot_and_update(std::size_t row, VarId entering, const DeltaRational& target);
  void pivot(std::size_t row, VarId entering);
  void explain_row(std::size_t row, bool below_lower);

  std::vector<DeltaRational> value_;
  std::vector<std::optional<DeltaRational>> lower_;
  std::vector<std::optional<DeltaRational>> upper_;
  std::vector<BoundReason> lower_reason_;
  std::vector<BoundReason> upper_reason_;
  std::vector<std::int64_t> row_of_;
  std::vector<Row> rows_;
  std::vector<TrailEntry> trail_;
  std::vector<std::size_t> levels_;
  Explanation conflict_;
  std::uint64_t pivots_ = 0;
};

/// One-sided bound on a variable.
struct VarBound {
  VarId var = 0;
  bool upper = true;
  Rational value;
  bool strict = false;
};

struct SimplexCheckResult {
  bool feasible = false;
  std::vector<Rational> model;        // when feasible
  std::vector<Rational> certificate;  // when infeasible: one multiplier per constraint
  std::vector<LinearConstraint> constraints;  // constraints the certificate refers to
};

/// Decides a conjunction of linear constraints plus variable bounds. Bounds
/// are appended to `constraints` (as single-variable constraints) in the
/// returned list, and the Farkas certificate indexes that combined list.
SimplexCheckResult simplex_check(std::size_t num_vars, const std::vector<LinearConstraint>& constraints,
                                 const std::vector<VarBound>& bounds = {});

/// Checks that `multipliers` prove `constraints` infeasible: multipliers of
/// inequalities are nonnegative, the combination cancels every variable,
/// and the combined right-hand side is negative (or zero with a strict
/// constraint participating).
bool verify_farkas(const std::vector<LinearConstraint>& constraints, const std::vector<Rational>& multipliers);

}  // namespace nesal
