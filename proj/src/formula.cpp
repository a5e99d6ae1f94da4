#include "nesal/formula.hpp"

#include <sstream>

namespace nesal {

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

bool compare(const Rational& lhs, CmpOp op, const Rational& rhs) {
  switch (op) {
    case CmpOp::Le: return lhs <= rhs;
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Ge: return lhs >= rhs;
    case CmpOp::Gt: return lhs > rhs;
    case CmpOp::Eq: return lhs == rhs;
    case CmpOp::Ne: return lhs != rhs;
  }
  return false;
}

LinearExpr LinearExpr::scalar(std::string vec, std::size_t index, Rational coef) {
  LinearExpr e;
  e.terms.push_back({std::move(coef), {std::move(vec), index}});
  return e;
}

Formula Formula::negation(Formula f) {
  Formula n{Kind::Not, {}, std::nullopt};
  n.children.push_back(std::move(f));
  return n;
}

Formula Formula::conjunction(std::vector<Formula> fs) {
  return {Kind::And, std::move(fs), std::nullopt};
}

Formula Formula::disjunction(std::vector<Formula> fs) {
  return {Kind::Or, std::move(fs), std::nullopt};
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  Formula f{Kind::Implies, {}, std::nullopt};
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

namespace {

void collect_vectors(const LinearExpr& e, std::set<std::string>& out) {
  for (const auto& t : e.terms) out.insert(t.var.vec);
}

void collect_vectors(const Formula& f, std::set<std::string>& out) {
  if (f.kind == Formula::Kind::Atom) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, CompareAtom>) {
            collect_vectors(a.lhs, out);
            collect_vectors(a.rhs, out);
          } else if constexpr (std::is_same_v<T, ArgmaxAtom>) {
            out.insert(a.vec);
          } else {
            out.insert(a.lhs);
            out.insert(a.rhs);
          }
        },
        *f.atom);
  }
  for (const auto& c : f.children) collect_vectors(c, out);
}

Formula cmp(LinearExpr lhs, CmpOp op, LinearExpr rhs) {
  return Formula::make_atom(CompareAtom{std::move(lhs), op, std::move(rhs)});
}

LinearExpr difference(const std::string& u, const std::string& v, std::size_t i) {
  LinearExpr e;
  e.terms.push_back({Rational(1), {u, i}});
  e.terms.push_back({Rational(-1), {v, i}});
  return e;
}

std::size_t dim_of(const DimMap& dims, const std::string& name) {
  auto it = dims.find(name);
  if (it == dims.end()) throw EvalError("desugar: dimension of vector '" + name + "' is unknown");
  return it->second;
}

// dist_inf(u, v) <= bound (or < bound when strict)
Formula dist_within(const std::string& u, const std::string& v, std::size_t n, const Rational& bound,
                    bool strict) {
  const CmpOp op = strict ? CmpOp::Lt : CmpOp::Le;
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < n; ++i) {
    parts.push_back(cmp(difference(u, v, i), op, LinearExpr::literal(bound)));
    parts.push_back(cmp(difference(v, u, i), op, LinearExpr::literal(bound)));
  }
  return Formula::conjunction(std::move(parts));
}

Formula desugar_atom(const Atom& atom, const DimMap& dims) {
  return std::visit(
      [&](const auto& a) -> Formula {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, CompareAtom>) {
          switch (a.op) {
            case CmpOp::Le:
            case CmpOp::Lt:
            case CmpOp::Eq: return cmp(a.lhs, a.op, a.rhs);
            case CmpOp::Ge: return cmp(a.rhs, CmpOp::Le, a.lhs);
            case CmpOp::Gt: return cmp(a.rhs, CmpOp::Lt, a.lhs);
            case CmpOp::Ne:
              return Formula::disjunction({cmp(a.lhs, CmpOp::Lt, a.rhs), cmp(a.rhs, CmpOp::Lt, a.lhs)});
          }
          return Formula::falsity();
        } else if constexpr (std::is_same_v<T, ArgmaxAtom>) {
          const std::size_t n = dim_of(dims, a.vec);
          std::vector<Formula> parts;
          for (std::size_t j = 0; j < n; ++j)
            if (j != a.cls)
              parts.push_back(cmp(LinearExpr::scalar(a.vec, j), CmpOp::Lt, LinearExpr::scalar(a.vec, a.cls)));
          return Formula::conjunction(std::move(parts));
        } else if constexpr (std::is_same_v<T, DistInfAtom>) {
          const std::size_t n = dim_of(dims, a.lhs);
          auto le = [&] { return dist_within(a.lhs, a.rhs, n, a.bound, false); };
          auto lt = [&] { return dist_within(a.lhs, a.rhs, n, a.bound, true); };
          switch (a.op) {
            case CmpOp::Le: return le();
            case CmpOp::Lt: return lt();
            case CmpOp::Gt: return Formula::negation(le());
            case CmpOp::Ge: return Formula::negation(lt());
            case CmpOp::Eq: return Formula::conjunction({le(), Formula::negation(lt())});
            case CmpOp::Ne: return Formula::negation(Formula::conjunction({le(), Formula::negation(lt())}));
          }
          return Formula::falsity();
        } else {
          const std::size_t n = dim_of(dims, a.lhs);
          std::vector<Formula> parts;
          for (std::size_t i = 0; i < n; ++i)
            parts.push_back(cmp(LinearExpr::scalar(a.lhs, i), CmpOp::Eq, LinearExpr::scalar(a.rhs, i)));
          return Formula::conjunction(std::move(parts));
        }
      },
      atom);
}

}  // namespace

std::set<std::string> free_vectors(const Formula& f) {
  std::set<std::string> out;
  collect_vectors(f, out);
  return out;
}

bool is_core(const Formula& f) {
  if (f.kind == Formula::Kind::Atom) {
    const auto* c = std::get_if<CompareAtom>(&*f.atom);
    return c != nullptr && (c->op == CmpOp::Le || c->op == CmpOp::Lt || c->op == CmpOp::Eq);
  }
  for (const auto& c : f.children)
    if (!is_core(c)) return false;
  return true;
}

Formula desugar(const Formula& f, const DimMap& dims) {
  if (f.kind == Formula::Kind::Atom) return desugar_atom(*f.atom, dims);
  Formula out{f.kind, {}, std::nullopt};
  out.children.reserve(f.children.size());
  for (const auto& c : f.children) out.children.push_back(desugar(c, dims));
  return out;
}

Rational eval_linear(const LinearExpr& e, const Env& env) {
  Rational acc = e.constant;
  for (const auto& t : e.terms) {
    auto it = env.find(t.var.vec);
    if (it == env.end()) throw EvalError("unbound vector '" + t.var.vec + "'");
    if (t.var.index >= it->second.size())
      throw EvalError("index " + std::to_string(t.var.index) + " out of range for '" + t.var.vec + "'");
    acc += t.coef * it->second[t.var.index];
  }
  return acc;
}

bool eval_formula(const Formula& f, const Env& env) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Atom: {
      const auto* c = std::get_if<CompareAtom>(&*f.atom);
      if (c == nullptr) throw EvalError("eval_formula expects a desugared formula");
      return compare(eval_linear(c->lhs, env), c->op, eval_linear(c->rhs, env));
    }
    case K::Not: return !eval_formula(f.children.at(0), env);
    case K::And: {
      bool all = true;
      // evaluate every child so unbound variables are reported deterministically
      for (const auto& c : f.children) all = eval_formula(c, env) && all;
      return all;
    }
    case K::Or: {
      bool any = false;
      for (const auto& c : f.children) any = eval_formula(c, env) || any;
      return any;
    }
    case K::Implies: {
      const bool lhs = eval_formula(f.children.at(0), env);
      const bool rhs = eval_formula(f.children.at(1), env);
      return !lhs || rhs;
    }
  }
  return false;
}

std::string render_linear(const LinearExpr& e) {
  std::ostringstream os;
  bool first = true;
  auto emit_signed = [&](const Rational& value, const std::string& body) {
    const bool negative = value.sign() < 0;
    if (first) {
      if (negative) os << "- ";
    } else {
      os << (negative ? " - " : " + ");
    }
    os << body;
    first = false;
  };
  for (const auto& t : e.terms) {
    const Rational mag = t.coef.abs();
    std::string ref = t.var.vec + "[" + std::to_string(t.var.index) + "]";
    emit_signed(t.coef, mag == Rational(1) ? ref : mag.str() + "*" + ref);
  }
  if (!e.constant.is_zero() || e.terms.empty()) emit_signed(e.constant, e.constant.abs().str());
  return os.str();
}

namespace {

std::string render_atom(const Atom& atom) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, CompareAtom>) {
          return render_linear(a.lhs) + " " + std::string(to_string(a.op)) + " " + render_linear(a.rhs);
        } else if constexpr (std::is_same_v<T, ArgmaxAtom>) {
          return "argmax(" + a.vec + ") == " + std::to_string(a.cls);
        } else if constexpr (std::is_same_v<T, DistInfAtom>) {
          return "dist_inf(" + a.lhs + ", " + a.rhs + ") " + std::string(to_string(a.op)) + " " + a.bound.str();
        } else {
          return a.lhs + " == " + a.rhs;
        }
      },
      atom);
}

bool is_leaf(const Formula& f) {
  return f.kind == Formula::Kind::True || f.kind == Formula::Kind::False || f.kind == Formula::Kind::Atom;
}

std::string render_child(const Formula& f) {
  return is_leaf(f) ? render_formula(f) : "(" + render_formula(f) + ")";
}

std::string join(const std::vector<Formula>& fs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += sep;
    out += render_child(fs[i]);
  }
  return out;
}

}  // namespace

std::string render_formula(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Atom: return render_atom(*f.atom);
    case K::Not: return "!" + render_child(f.children.at(0));
    case K::And: return f.children.empty() ? "true" : join(f.children, " && ");
    case K::Or: return f.children.empty() ? "false" : join(f.children, " || ");
    case K::Implies: return render_child(f.children.at(0)) + " -> " + render_child(f.children.at(1));
  }
  return "";
}

}  // namespace nesal
