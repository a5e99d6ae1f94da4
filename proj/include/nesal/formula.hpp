#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nesal/rational.hpp"

namespace nesal {

enum class CmpOp { Le, Lt, Ge, Gt, Eq, Ne };

std::string_view to_string(CmpOp op);

/// Compares two values under `op`.
bool compare(const Rational& lhs, CmpOp op, const Rational& rhs);

struct ScalarRef {
  std::string vec;
  std::size_t index = 0;
  friend bool operator==(const ScalarRef&, const ScalarRef&) = default;
};

struct Term {
  Rational coef;
  ScalarRef var;
  friend bool operator==(const Term&, const Term&) = default;
};

struct LinearExpr {
  Rational constant;
  std::vector<Term> terms;

  static LinearExpr scalar(std::string vec, std::size_t index, Rational coef = 1);
  static LinearExpr literal(Rational value) { return {std::move(value), {}}; }

  friend bool operator==(const LinearExpr&, const LinearExpr&) = default;
};

struct CompareAtom {
  LinearExpr lhs;
  CmpOp op = CmpOp::Le;
  LinearExpr rhs;
  friend bool operator==(const CompareAtom&, const CompareAtom&) = default;
};

/// argmax(vec) == cls
struct ArgmaxAtom {
  std::string vec;
  std::size_t cls = 0;
  friend bool operator==(const ArgmaxAtom&, const ArgmaxAtom&) = default;
};

/// dist_inf(lhs, rhs) op bound
struct DistInfAtom {
  std::string lhs;
  std::string rhs;
  CmpOp op = CmpOp::Le;
  Rational bound;
  friend bool operator==(const DistInfAtom&, const DistInfAtom&) = default;
};

/// lhs == rhs, componentwise
struct VecEqAtom {
  std::string lhs;
  std::string rhs;
  friend bool operator==(const VecEqAtom&, const VecEqAtom&) = default;
};

using Atom = std::variant<CompareAtom, ArgmaxAtom, DistInfAtom, VecEqAtom>;

/// Quantifier-free formula tree. And/Or are n-ary (empty And is true, empty
/// Or is false); Implies and Not have exactly two and one child.
struct Formula {
  enum class Kind { True, False, Atom, Not, And, Or, Implies };

  Kind kind = Kind::True;
  std::vector<Formula> children;
  std::optional<nesal::Atom> atom;

  static Formula truth() { return {Kind::True, {}, std::nullopt}; }
  static Formula falsity() { return {Kind::False, {}, std::nullopt}; }
  static Formula make_atom(nesal::Atom a) { return {Kind::Atom, {}, std::move(a)}; }
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> fs);
  static Formula disjunction(std::vector<Formula> fs);
  static Formula implication(Formula lhs, Formula rhs);

  friend bool operator==(const Formula&, const Formula&) = default;
};

using DimMap = std::map<std::string, std::size_t>;
using Env = std::map<std::string, std::vector<Rational>>;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector names referenced anywhere in the formula.
std::set<std::string> free_vectors(const Formula& f);

/// True iff the formula contains only Compare atoms with ops {<=, <, =}.
bool is_core(const Formula& f);

/// Rewrites argmax, dist_inf, vector equality and the {>=, >, !=}
/// comparisons into Compare atoms over {<=, <, =}. Argmax is strict, so it
/// is false under ties.
Formula desugar(const Formula& f, const DimMap& dims);

/// Exact evaluation of a formula built from Compare atoms.
bool eval_formula(const Formula& f, const Env& env);

Rational eval_linear(const LinearExpr& e, const Env& env);

std::string render_linear(const LinearExpr& e);
std::string render_formula(const Formula& f);

}  // namespace nesal
