#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nesal/formula.hpp"
#include "nesal/network.hpp"
#include "nesal/property.hpp"
#include "nesal/rational.hpp"

namespace nesal {

using VarId = std::size_t;

/// Where a solver variable came from. For network variables, `assignment`
/// is the index of the assignment whose encoding introduced it.
struct Provenance {
  enum class Kind { NetInput, NetNeuronPre, NetNeuronPost, Auxiliary };
  Kind kind = Kind::Auxiliary;
  std::size_t assignment = 0;
  std::size_t layer = 0;
  std::size_t index = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

enum class RelOp { Le, Lt, Eq };

std::string_view to_string(RelOp op);

/// sum(coef * var) op rhs; terms are sorted by variable and coefficients are
/// nonzero.
struct LinearConstraint {
  std::vector<std::pair<Rational, VarId>> terms;
  RelOp op = RelOp::Le;
  Rational rhs;

  /// Builds a normalized constraint, merging duplicate variables.
  static LinearConstraint make(const std::vector<std::pair<Rational, VarId>>& terms, RelOp op, Rational rhs);
  bool holds(const std::vector<Rational>& model) const;

  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

/// post = max(0, pre)
struct ReluConstraint {
  VarId pre = 0;
  VarId post = 0;
  friend bool operator==(const ReluConstraint&, const ReluConstraint&) = default;
};

/// Negation-free Boolean structure over atom indices into VC::atoms.
struct BoolFormula {
  enum class Kind { True, False, Atom, And, Or };
  Kind kind = Kind::True;
  std::vector<BoolFormula> children;
  std::size_t atom = 0;

  static BoolFormula truth() { return {}; }
  static BoolFormula falsity() { return {Kind::False, {}, 0}; }
  static BoolFormula leaf(std::size_t a) { return {Kind::Atom, {}, a}; }
  /// Flattens nested connectives and folds True/False.
  static BoolFormula conjunction(std::vector<BoolFormula> cs);
  static BoolFormula disjunction(std::vector<BoolFormula> cs);

  bool eval(const std::vector<bool>& atom_values) const;

  friend bool operator==(const BoolFormula&, const BoolFormula&) = default;
};

struct Port {
  std::string output;
  std::string network;
  std::string input;
  std::vector<VarId> inputs;
  std::vector<VarId> outputs;
  friend bool operator==(const Port&, const Port&) = default;
};

/// Negated verification condition: pre /\ networks /\ !post.
struct VC {
  std::vector<Provenance> varmap;
  std::vector<LinearConstraint> hard;
  std::vector<ReluConstraint> relus;
  std::vector<LinearConstraint> atoms;
  BoolFormula skeleton;
  std::vector<Port> ports;
  std::map<std::string, std::vector<VarId>> vector_vars;
  // Bounds implied by single-variable conjuncts at the top of the skeleton.
  std::vector<std::optional<Rational>> box_lower;
  std::vector<std::optional<Rational>> box_upper;

  std::size_t num_vars() const { return varmap.size(); }
  std::string var_label(VarId v) const;

  friend bool operator==(const VC&, const VC&) = default;
};

class VarAllocator {
 public:
  VarId fresh(Provenance p) {
    vars_.push_back(p);
    return vars_.size() - 1;
  }
  std::size_t size() const { return vars_.size(); }
  std::vector<Provenance> release() { return std::move(vars_); }

 private:
  std::vector<Provenance> vars_;
};

struct NetworkEncoding {
  std::vector<LinearConstraint> hard;
  std::vector<ReluConstraint> relus;
  std::vector<VarId> inputs;
  std::vector<VarId> outputs;
  // [layer][neuron]
  std::vector<std::vector<VarId>> pre;
  std::vector<std::vector<VarId>> post;
};

/// Encodes one occurrence of `net`. Input variables are allocated unless
/// `shared_inputs` is given.
NetworkEncoding encode_network(const Network& net, std::size_t assignment, VarAllocator& alloc,
                               const std::vector<VarId>* shared_inputs = nullptr);

/// Negation normal form of a core formula (no Not, no Implies).
Formula nnf(const Formula& f);

/// Negation normal form of !f.
Formula negate(const Formula& f);

class CompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds the negated verification condition of a bound property.
VC compile(const Property& prop, const NetworkMap& nets);

/// One line per variable: id and provenance.
std::string render_varmap(const VC& vc);

}  // namespace nesal
