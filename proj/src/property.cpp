#include "nesal/property.hpp"

#include <cctype>
#include <filesystem>
#include <set>
#include <sstream>

namespace nesal {

PropertyError::PropertyError(Kind kind, const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(line ? what + " at line " + std::to_string(line) + ", column " + std::to_string(column)
                              : what),
      kind_(kind),
      line_(line),
      column_(column) {}

const NetDecl* Property::find_network(std::string_view name) const {
  for (const auto& n : networks)
    if (n.name == name) return &n;
  return nullptr;
}

bool Property::is_bound() const {
  if (vectors.empty()) return false;
  for (const auto& [_, v] : vectors)
    if (v.dim == 0) return false;
  return true;
}

DimMap Property::dims() const {
  DimMap out;
  for (const auto& [name, v] : vectors) out[name] = v.dim;
  return out;
}

namespace {

enum class Tok {
  End, Ident, Number, String,
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Semi, Colon, Comma, Assign, Bang, AndAnd, OrOr, Arrow,
  Le, Lt, Ge, Gt, EqEq, Ne, Plus, Minus, Star,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Number;
        lex_number(t);
      } else if (c == '"') {
        t.kind = Tok::String;
        lex_string(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw PropertyError(PropertyError::Kind::Syntax, msg, line_, col_);
  }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  bool peek_is(char c, std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() && src_[pos_ + ahead] == c;
  }
  bool peek_digit(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + ahead]));
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    while (peek_digit()) t.text += advance();
    if (peek_is('.') && peek_digit(1)) {
      t.text += advance();
      while (peek_digit()) t.text += advance();
    } else if (peek_is('/') && peek_digit(1)) {
      t.text += advance();
      while (peek_digit()) t.text += advance();
    }
  }

  void lex_string(Token& t) {
    advance();
    for (;;) {
      if (pos_ >= src_.size() || peek_is('\n')) fail("unterminated string literal");
      char c = advance();
      if (c == '"') return;
      if (c == '\\') {
        if (pos_ >= src_.size()) fail("unterminated string literal");
        c = advance();
      }
      t.text += c;
    }
  }

  void lex_punct(Token& t) {
    auto two = [&](char a, char b) { return peek_is(a) && peek_is(b, 1); };
    struct Rule { const char* text; Tok kind; };
    static constexpr Rule rules[] = {
        {":=", Tok::Assign}, {"&&", Tok::AndAnd}, {"||", Tok::OrOr}, {"->", Tok::Arrow},
        {"<=", Tok::Le},     {">=", Tok::Ge},     {"==", Tok::EqEq}, {"!=", Tok::Ne},
        {"{", Tok::LBrace},  {"}", Tok::RBrace},  {"(", Tok::LParen}, {")", Tok::RParen},
        {"[", Tok::LBracket}, {"]", Tok::RBracket}, {";", Tok::Semi}, {":", Tok::Colon},
        {",", Tok::Comma},   {"!", Tok::Bang},    {"<", Tok::Lt},     {">", Tok::Gt},
        {"+", Tok::Plus},    {"-", Tok::Minus},   {"*", Tok::Star},
    };
    for (const auto& r : rules) {
      const bool is_two = r.text[1] != '\0';
      if (is_two ? two(r.text[0], r.text[1]) : peek_is(r.text[0])) {
        t.kind = r.kind;
        t.text = r.text;
        advance();
        if (is_two) advance();
        return;
      }
    }
    fail(std::string("unexpected character '") + src_[pos_] + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Property parse() {
    Property prop;
    while (at_ident("nuv") || at_ident("spec")) prop.networks.push_back(parse_netdecl(prop));
    if (prop.networks.empty()) fail("expected a network declaration ('nuv' or 'spec')");

    expect_keyword("pre");
    expect(Tok::LBrace, "'{'");
    prop.pre = parse_formula();
    expect(Tok::RBrace, "'}'");

    expect_keyword("assign");
    expect(Tok::LBrace, "'{'");
    prop.assigns.push_back(parse_assign());
    while (accept(Tok::Semi)) {
      if (peek().kind == Tok::RBrace) break;
      prop.assigns.push_back(parse_assign());
    }
    expect(Tok::RBrace, "'}'");

    expect_keyword("post");
    expect(Tok::LBrace, "'{'");
    prop.post = parse_formula();
    expect(Tok::RBrace, "'}'");
    if (peek().kind != Tok::End) fail("unexpected trailing input");
    return prop;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  bool at_ident(std::string_view word) const { return peek().kind == Tok::Ident && peek().text == word; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw PropertyError(PropertyError::Kind::Syntax, msg + " (found " + found + ")", t.line, t.column);
  }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    return next();
  }
  void expect_keyword(std::string_view word) {
    if (!at_ident(word)) fail("expected '" + std::string(word) + "'");
    next();
  }

  static bool is_reserved(std::string_view w) {
    static const std::set<std::string, std::less<>> words = {"nuv", "spec", "pre", "assign", "post",
                                                             "true", "false", "argmax", "dist_inf"};
    return words.count(w) > 0;
  }

  std::string expect_name(const char* what) {
    if (peek().kind != Tok::Ident || is_reserved(peek().text)) fail(std::string("expected ") + what);
    return next().text;
  }

  NetDecl parse_netdecl(const Property& prop) {
    NetDecl d;
    d.role = next().text == "nuv" ? NetRole::Nuv : NetRole::Spec;
    const Token& name_tok = peek();
    d.name = expect_name("network name");
    if (prop.find_network(d.name))
      throw PropertyError(PropertyError::Kind::Bind, "duplicate network name '" + d.name + "'", name_tok.line,
                          name_tok.column);
    expect(Tok::Colon, "':'");
    d.path = expect(Tok::String, "quoted network path").text;
    expect(Tok::Semi, "';'");
    return d;
  }

  Assignment parse_assign() {
    Assignment a;
    a.output = expect_name("output vector name");
    expect(Tok::Assign, "':='");
    a.network = expect_name("network name");
    expect(Tok::LParen, "'('");
    a.input = expect_name("input vector name");
    expect(Tok::RParen, "')'");
    return a;
  }

  Formula parse_formula() { return parse_implies(); }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (accept(Tok::Arrow)) return Formula::implication(std::move(lhs), parse_implies());
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (accept(Tok::OrOr)) lhs = Formula::disjunction({std::move(lhs), parse_and()});
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_unary();
    while (accept(Tok::AndAnd)) lhs = Formula::conjunction({std::move(lhs), parse_unary()});
    return lhs;
  }

  Formula parse_unary() {
    if (accept(Tok::Bang)) return Formula::negation(parse_unary());
    if (accept(Tok::LParen)) {
      Formula f = parse_formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at_ident("true")) {
      next();
      return Formula::truth();
    }
    if (at_ident("false")) {
      next();
      return Formula::falsity();
    }
    return Formula::make_atom(parse_atom());
  }

  std::size_t parse_index() {
    const Token& t = expect(Tok::Number, "integer index");
    if (t.text.find_first_not_of("0123456789") != std::string::npos)
      throw PropertyError(PropertyError::Kind::Syntax, "index must be a non-negative integer", t.line, t.column);
    return std::stoul(t.text);
  }

  static std::optional<CmpOp> cmp_of(Tok k) {
    switch (k) {
      case Tok::Le: return CmpOp::Le;
      case Tok::Lt: return CmpOp::Lt;
      case Tok::Ge: return CmpOp::Ge;
      case Tok::Gt: return CmpOp::Gt;
      case Tok::EqEq: return CmpOp::Eq;
      case Tok::Ne: return CmpOp::Ne;
      default: return std::nullopt;
    }
  }

  CmpOp expect_cmp() {
    auto op = cmp_of(peek().kind);
    if (!op) fail("expected a comparison operator");
    next();
    return *op;
  }

  Rational parse_signed_number() {
    const bool negative = accept(Tok::Minus);
    Rational r = Rational::parse(expect(Tok::Number, "number").text);
    return negative ? -r : r;
  }

  Atom parse_atom() {
    if (at_ident("argmax")) {
      next();
      expect(Tok::LParen, "'('");
      ArgmaxAtom a;
      a.vec = expect_name("vector name");
      expect(Tok::RParen, "')'");
      expect(Tok::EqEq, "'=='");
      a.cls = parse_index();
      return a;
    }
    if (at_ident("dist_inf")) {
      next();
      expect(Tok::LParen, "'('");
      DistInfAtom a;
      a.lhs = expect_name("vector name");
      expect(Tok::Comma, "','");
      a.rhs = expect_name("vector name");
      expect(Tok::RParen, "')'");
      a.op = expect_cmp();
      a.bound = parse_signed_number();
      return a;
    }
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::EqEq && peek(2).kind == Tok::Ident &&
        peek(3).kind != Tok::LBracket && !is_reserved(peek(2).text)) {
      VecEqAtom a;
      a.lhs = next().text;
      next();
      a.rhs = next().text;
      return a;
    }
    CompareAtom c;
    c.lhs = parse_linear();
    c.op = expect_cmp();
    c.rhs = parse_linear();
    return c;
  }

  // term := [NUM "*"] IDENT "[" INT "]" | NUM, with an optional leading sign
  void parse_term(LinearExpr& e, bool negative) {
    Rational coef(1);
    if (peek().kind == Tok::Number) {
      Rational value = Rational::parse(next().text);
      if (!accept(Tok::Star)) {
        e.constant += negative ? -value : value;
        return;
      }
      coef = value;
    }
    ScalarRef ref;
    ref.vec = expect_name("vector name");
    expect(Tok::LBracket, "'['");
    ref.index = parse_index();
    expect(Tok::RBracket, "']'");
    e.terms.push_back({negative ? -coef : coef, std::move(ref)});
  }

  LinearExpr parse_linear() {
    LinearExpr e;
    bool negative = accept(Tok::Minus);
    parse_term(e, negative);
    for (;;) {
      if (accept(Tok::Plus)) {
        negative = false;
      } else if (accept(Tok::Minus)) {
        negative = true;
      } else {
        break;
      }
      parse_term(e, negative);
    }
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

PropertyError bind_error(const std::string& msg) { return {PropertyError::Kind::Bind, msg}; }
PropertyError dim_error(const std::string& msg) { return {PropertyError::Kind::Dimension, msg}; }

// Name resolution over a freshly parsed property.
void resolve_names(Property& prop) {
  std::set<std::string> outputs;
  std::set<std::string> inputs;
  bool nuv_used = false;
  for (std::size_t i = 0; i < prop.assigns.size(); ++i) {
    const Assignment& a = prop.assigns[i];
    const NetDecl* net = prop.find_network(a.network);
    if (!net) throw bind_error("assignment " + std::to_string(i) + ": unknown network '" + a.network + "'");
    if (net->role == NetRole::Nuv) nuv_used = true;
    if (prop.find_network(a.output))
      throw bind_error("vector '" + a.output + "' clashes with a network name");
    if (prop.find_network(a.input)) throw bind_error("vector '" + a.input + "' clashes with a network name");
    if (!outputs.insert(a.output).second) throw bind_error("duplicate variable '" + a.output + "'");
    inputs.insert(a.input);
  }
  for (const auto& out : outputs)
    if (inputs.count(out))
      throw bind_error("vector '" + out + "' is used both as a network output and as a network input");
  if (!nuv_used) throw bind_error("no assignment names a network under verification");

  for (const auto& name : free_vectors(prop.pre)) {
    if (outputs.count(name))
      throw bind_error("pre-condition references output vector '" + name + "'; only inputs are allowed");
    if (!inputs.count(name)) throw bind_error("pre-condition references undeclared vector '" + name + "'");
  }
  for (const auto& name : free_vectors(prop.post))
    if (!inputs.count(name) && !outputs.count(name))
      throw bind_error("post-condition references undeclared vector '" + name + "'");

  prop.vectors.clear();
  for (const auto& name : inputs) prop.vectors[name] = {name, 0, VarRole::NetInput};
  for (const auto& name : outputs) prop.vectors[name] = {name, 0, VarRole::NetOutput};
}

void check_formula_shapes(const Formula& f, const DimMap& dims, const char* where) {
  auto dim = [&](const std::string& v) { return dims.at(v); };
  auto check_linear = [&](const LinearExpr& e) {
    for (const auto& t : e.terms)
      if (t.var.index >= dim(t.var.vec))
        throw dim_error(std::string(where) + ": index " + std::to_string(t.var.index) + " out of range for '" +
                        t.var.vec + "' of dimension " + std::to_string(dim(t.var.vec)));
  };
  if (f.kind == Formula::Kind::Atom) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, CompareAtom>) {
            check_linear(a.lhs);
            check_linear(a.rhs);
          } else if constexpr (std::is_same_v<T, ArgmaxAtom>) {
            if (a.cls >= dim(a.vec))
              throw dim_error(std::string(where) + ": argmax class " + std::to_string(a.cls) +
                              " out of range for '" + a.vec + "' of dimension " + std::to_string(dim(a.vec)));
          } else {
            if (dim(a.lhs) != dim(a.rhs))
              throw dim_error(std::string(where) + ": vectors '" + a.lhs + "' (dimension " +
                              std::to_string(dim(a.lhs)) + ") and '" + a.rhs + "' (dimension " +
                              std::to_string(dim(a.rhs)) + ") differ in dimension");
          }
        },
        *f.atom);
  }
  for (const auto& c : f.children) check_formula_shapes(c, dims, where);
}

}  // namespace

Property parse_property(std::string_view text) {
  Property prop = Parser(Lexer(text).run()).parse();
  resolve_names(prop);
  return prop;
}

std::string render_property(const Property& prop) {
  std::ostringstream os;
  for (const auto& n : prop.networks) {
    std::string escaped;
    for (char c : n.path) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c;
    }
    os << (n.role == NetRole::Nuv ? "nuv " : "spec ") << n.name << ": \"" << escaped << "\";\n";
  }
  os << "pre {\n  " << render_formula(prop.pre) << "\n}\n";
  os << "assign {\n";
  for (std::size_t i = 0; i < prop.assigns.size(); ++i) {
    const auto& a = prop.assigns[i];
    os << "  " << a.output << " := " << a.network << "(" << a.input << ")"
       << (i + 1 < prop.assigns.size() ? ";" : "") << "\n";
  }
  os << "}\n";
  os << "post {\n  " << render_formula(prop.post) << "\n}\n";
  return os.str();
}

Property bind(const Property& prop, const NetworkMap& nets) {
  Property out = prop;
  for (auto& [_, v] : out.vectors) v.dim = 0;
  for (std::size_t i = 0; i < out.assigns.size(); ++i) {
    const Assignment& a = out.assigns[i];
    const std::string label =
        "assignment " + std::to_string(i) + " (" + a.output + " := " + a.network + "(" + a.input + "))";
    auto it = nets.find(a.network);
    if (it == nets.end()) throw bind_error(label + ": network '" + a.network + "' is not loaded");
    const Network& net = it->second;
    VectorVar& in = out.vectors.at(a.input);
    if (in.dim != 0 && in.dim != net.input_dim)
      throw dim_error(label + ": input '" + a.input + "' has dimension " + std::to_string(in.dim) + " but '" +
                      a.network + "' expects " + std::to_string(net.input_dim));
    in.dim = net.input_dim;
    out.vectors.at(a.output).dim = net.output_dim();
  }
  const DimMap dims = out.dims();
  check_formula_shapes(out.pre, dims, "pre-condition");
  check_formula_shapes(out.post, dims, "post-condition");
  return out;
}

NetworkMap load_declared_networks(const Property& prop, const std::string& base_dir,
                                  const std::map<std::string, std::string>& overrides) {
  NetworkMap nets;
  for (const auto& decl : prop.networks) {
    std::string path;
    if (auto it = overrides.find(decl.name); it != overrides.end()) {
      path = it->second;
    } else {
      std::filesystem::path p(decl.path);
      path = (p.is_absolute() || base_dir.empty()) ? p.string() : (std::filesystem::path(base_dir) / p).string();
    }
    Network net = load_network_file(path);
    if (net.name.empty()) net.name = decl.name;
    nets.emplace(decl.name, std::move(net));
  }
  for (const auto& [name, _] : overrides)
    if (!prop.find_network(name)) throw bind_error("--network override for undeclared network '" + name + "'");
  return nets;
}

}  // namespace nesal
