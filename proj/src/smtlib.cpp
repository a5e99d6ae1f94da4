#include "nesal/smtlib.hpp"

#include <cctype>
#include <map>
#include <memory>
#include <sstream>

namespace nesal {

std::string smt2_rational(const Rational& r) {
  const Rational a = r.abs();
  const std::string body =
      a.is_integer() ? a.str() : "(/ " + a.numerator().get_str() + " " + a.denominator().get_str() + ")";
  return r.sign() < 0 ? "(- " + body + ")" : body;
}

namespace {

std::string var_name(VarId v) { return "v" + std::to_string(v); }

std::string render_sum(const std::vector<std::pair<Rational, VarId>>& terms) {
  if (terms.empty()) return "0";
  std::vector<std::string> parts;
  for (const auto& [c, v] : terms)
    parts.push_back(c == Rational(1) ? var_name(v) : "(* " + smt2_rational(c) + " " + var_name(v) + ")");
  if (parts.size() == 1) return parts.front();
  std::string s = "(+";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::string render_constraint(const LinearConstraint& c) {
  const char* op = c.op == RelOp::Le ? "<=" : c.op == RelOp::Lt ? "<" : "=";
  return std::string("(") + op + " " + render_sum(c.terms) + " " + smt2_rational(c.rhs) + ")";
}

std::string render_bool(const BoolFormula& f, const VC& vc) {
  using K = BoolFormula::Kind;
  switch (f.kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Atom: return render_constraint(vc.atoms.at(f.atom));
    case K::And:
    case K::Or: {
      std::string s = f.kind == K::And ? "(and" : "(or";
      for (const auto& c : f.children) s += " " + render_bool(c, vc);
      return s + ")";
    }
  }
  return "true";
}

}  // namespace

std::string export_smt2(const VC& vc) {
  std::ostringstream os;
  os << "(set-logic QF_LRA)\n";
  os << "(set-option :produce-models true)\n";
  os << "; negated verification condition: sat means the property is violated\n";
  for (VarId v = 0; v < vc.num_vars(); ++v)
    os << "(declare-const " << var_name(v) << " Real) ; " << vc.var_label(v) << "\n";
  for (const auto& c : vc.hard) os << "(assert " << render_constraint(c) << ")\n";
  for (const auto& r : vc.relus) {
    const std::string y = var_name(r.pre), x = var_name(r.post);
    os << "(assert (and (=> (<= " << y << " 0) (= " << x << " 0)) (=> (> " << y << " 0) (= " << x << " " << y
       << "))))\n";
  }
  os << "(assert " << render_bool(vc.skeleton, vc) << ")\n";
  os << "(check-sat)\n";
  os << "(get-model)\n";
  return os.str();
}

namespace {

struct Sexp {
  bool is_list = false;
  std::string atom;
  std::vector<Sexp> items;
};

class SexpReader {
 public:
  explicit SexpReader(std::string_view text) : text_(text) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> out;
    for (skip(); pos_ < text_.size(); skip()) out.push_back(read());
    return out;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    if (pos_ >= text_.size()) throw SmtError("unexpected end of model text");
    const char c = text_[pos_];
    if (c == ')') throw SmtError("unbalanced ')' at offset " + std::to_string(pos_));
    if (c == '(') {
      ++pos_;
      Sexp list;
      list.is_list = true;
      for (skip(); pos_ < text_.size() && text_[pos_] != ')'; skip()) list.items.push_back(read());
      if (pos_ >= text_.size()) throw SmtError("unterminated '(' in model text");
      ++pos_;
      return list;
    }
    Sexp a;
    if (c == '|' || c == '"') {
      const std::size_t end = text_.find(c, pos_ + 1);
      if (end == std::string_view::npos) throw SmtError("unterminated quoted token in model text");
      a.atom = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return a;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    a.atom = std::string(text_.substr(start, pos_ - start));
    return a;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool is_var_name(const Sexp& s) {
  if (s.is_list || s.atom.size() < 2 || s.atom[0] != 'v') return false;
  for (std::size_t i = 1; i < s.atom.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s.atom[i]))) return false;
  return true;
}

std::string show(const Sexp& s) {
  if (!s.is_list) return s.atom;
  std::string out = "(";
  for (std::size_t i = 0; i < s.items.size(); ++i) out += (i ? " " : "") + show(s.items[i]);
  return out + ")";
}

Rational value_of(const Sexp& s) {
  if (!s.is_list) {
    try {
      return Rational::parse(s.atom);
    } catch (const std::exception&) {
      throw SmtError("unparsable value '" + s.atom + "'");
    }
  }
  if (s.items.empty() || s.items[0].is_list) throw SmtError("unparsable value '" + show(s) + "'");
  const std::string& op = s.items[0].atom;
  const std::size_t n = s.items.size() - 1;
  auto arg = [&](std::size_t i) { return value_of(s.items[i + 1]); };
  if (op == "-" && n == 1) return -arg(0);
  if (op == "-" && n >= 2) {
    Rational r = arg(0);
    for (std::size_t i = 1; i < n; ++i) r -= arg(i);
    return r;
  }
  if (op == "+" && n >= 1) {
    Rational r;
    for (std::size_t i = 0; i < n; ++i) r += arg(i);
    return r;
  }
  if (op == "*" && n >= 1) {
    Rational r(1);
    for (std::size_t i = 0; i < n; ++i) r *= arg(i);
    return r;
  }
  if (op == "/" && n == 2) {
    const Rational d = arg(1);
    if (d.is_zero()) throw SmtError("division by zero in value '" + show(s) + "'");
    return arg(0) / d;
  }
  throw SmtError("unparsable value '" + show(s) + "'");
}

void collect(const Sexp& s, std::map<std::string, Rational>& out) {
  if (!s.is_list) return;
  if (s.items.size() == 5 && !s.items[0].is_list && s.items[0].atom == "define-fun" && is_var_name(s.items[1])) {
    out[s.items[1].atom] = value_of(s.items[4]);
    return;
  }
  if (s.items.size() == 2 && is_var_name(s.items[0])) {
    out[s.items[0].atom] = value_of(s.items[1]);
    return;
  }
  for (const auto& c : s.items) collect(c, out);
}

}  // namespace

Model import_model(std::string_view text, const VC& vc) {
  std::map<std::string, Rational> bound;
  for (const auto& s : SexpReader(text).read_all()) {
    if (!s.is_list && (s.atom == "sat" || s.atom == "model")) continue;
    if (!s.is_list && s.atom == "unsat") throw SmtError("solver answered unsat; there is no model");
    collect(s, bound);
  }
  Model m;
  m.reserve(vc.num_vars());
  for (VarId v = 0; v < vc.num_vars(); ++v) {
    auto it = bound.find(var_name(v));
    if (it == bound.end()) throw SmtError("missing binding for " + var_name(v));
    m.push_back(it->second);
  }
  return m;
}

}  // namespace nesal
