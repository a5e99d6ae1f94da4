#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nesal/vc.hpp"

namespace nesal {

struct Lit {
  std::size_t var = 0;
  bool positive = true;

  Lit operator~() const { return {var, !positive}; }
  friend bool operator==(const Lit&, const Lit&) = default;
};

using Clause = std::vector<Lit>;

/// Boolean variables 0..num_atoms-1 stand for the skeleton's atoms; the rest
/// are definitions introduced by the encoding.
struct Cnf {
  std::size_t num_vars = 0;
  std::size_t num_atoms = 0;
  std::vector<Clause> clauses;

  std::optional<std::size_t> atom_of(std::size_t var) const {
    return var < num_atoms ? std::optional<std::size_t>(var) : std::nullopt;
  }
  bool has_empty_clause() const;
};

/// Polarity-aware Tseitin encoding of a negation-free skeleton. Atoms only
/// occur positively, so a model of the clauses that makes a set of atoms
/// true satisfies the skeleton whenever those atoms hold.
Cnf tseitin(const BoolFormula& skeleton, std::size_t num_atoms);

}  // namespace nesal
