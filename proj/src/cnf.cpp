#include "nesal/cnf.hpp"

namespace nesal {

bool Cnf::has_empty_clause() const {
  for (const auto& c : clauses)
    if (c.empty()) return true;
  return false;
}

namespace {

class Encoder {
 public:
  explicit Encoder(Cnf& cnf) : cnf_(cnf) {}

  // Literal that implies `f`.
  Lit literal(const BoolFormula& f) {
    using K = BoolFormula::Kind;
    switch (f.kind) {
      case K::Atom: return {f.atom, true};
      case K::True:
      case K::False: {
        const Lit t{cnf_.num_vars++, true};
        if (f.kind == K::False) cnf_.clauses.push_back({~t});
        return t;
      }
      case K::And: {
        const Lit t{cnf_.num_vars++, true};
        for (const auto& c : f.children) cnf_.clauses.push_back({~t, literal(c)});
        return t;
      }
      case K::Or: {
        const Lit t{cnf_.num_vars++, true};
        Clause clause{~t};
        for (const auto& c : f.children) clause.push_back(literal(c));
        cnf_.clauses.push_back(std::move(clause));
        return t;
      }
    }
    return {};
  }

  void assert_top(const BoolFormula& f) {
    using K = BoolFormula::Kind;
    switch (f.kind) {
      case K::True: return;
      case K::False: cnf_.clauses.emplace_back(); return;
      case K::Atom: cnf_.clauses.push_back({{f.atom, true}}); return;
      case K::And:
        for (const auto& c : f.children) assert_top(c);
        return;
      case K::Or: {
        Clause clause;
        for (const auto& c : f.children) clause.push_back(literal(c));
        cnf_.clauses.push_back(std::move(clause));
        return;
      }
    }
  }

 private:
  Cnf& cnf_;
};

}  // namespace

Cnf tseitin(const BoolFormula& skeleton, std::size_t num_atoms) {
  Cnf cnf;
  cnf.num_atoms = num_atoms;
  cnf.num_vars = num_atoms;
  Encoder(cnf).assert_top(skeleton);
  return cnf;
}

}  // namespace nesal
