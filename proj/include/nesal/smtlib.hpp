#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "nesal/solver.hpp"
#include "nesal/vc.hpp"

namespace nesal {

class SmtError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SMT-LIB 2 (QF_LRA) document asserting the negated verification condition.
/// Variables are named v<id>; relus are written as the two implications
/// (Y <= 0 => X = 0) and (Y > 0 => X = Y).
std::string export_smt2(const VC& vc);

/// Renders a rational as an SMT-LIB real term: 3, (- 3), (/ 1 2), (- (/ 1 2)).
std::string smt2_rational(const Rational& r);

/// Reads a model in either the plain binding-list form ((v0 (/ 1 2)) ...) or
/// the define-fun form most solvers print. Every variable of `vc` must be
/// bound. Leading "sat" is tolerated.
Model import_model(std::string_view text, const VC& vc);

}  // namespace nesal
