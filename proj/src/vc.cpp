#include "nesal/vc.hpp"

#include <sstream>

namespace nesal {

std::string_view to_string(RelOp op) {
  switch (op) {
    case RelOp::Le: return "<=";
    case RelOp::Lt: return "<";
    case RelOp::Eq: return "=";
  }
  return "?";
}

LinearConstraint LinearConstraint::make(const std::vector<std::pair<Rational, VarId>>& terms, RelOp op,
                                        Rational rhs) {
  std::map<VarId, Rational> merged;
  for (const auto& [c, v] : terms) merged[v] += c;
  LinearConstraint out;
  for (auto& [v, c] : merged)
    if (!c.is_zero()) out.terms.emplace_back(std::move(c), v);
  out.op = op;
  out.rhs = std::move(rhs);
  return out;
}

bool LinearConstraint::holds(const std::vector<Rational>& model) const {
  Rational lhs;
  for (const auto& [c, v] : terms) lhs += c * model.at(v);
  switch (op) {
    case RelOp::Le: return lhs <= rhs;
    case RelOp::Lt: return lhs < rhs;
    case RelOp::Eq: return lhs == rhs;
  }
  return false;
}

BoolFormula BoolFormula::conjunction(std::vector<BoolFormula> cs) {
  BoolFormula out{Kind::And, {}, 0};
  for (auto& c : cs) {
    if (c.kind == Kind::False) return falsity();
    if (c.kind == Kind::True) continue;
    if (c.kind == Kind::And) {
      for (auto& g : c.children) out.children.push_back(std::move(g));
    } else {
      out.children.push_back(std::move(c));
    }
  }
  if (out.children.empty()) return truth();
  if (out.children.size() == 1) return std::move(out.children.front());
  return out;
}

BoolFormula BoolFormula::disjunction(std::vector<BoolFormula> cs) {
  BoolFormula out{Kind::Or, {}, 0};
  for (auto& c : cs) {
    if (c.kind == Kind::True) return truth();
    if (c.kind == Kind::False) continue;
    if (c.kind == Kind::Or) {
      for (auto& g : c.children) out.children.push_back(std::move(g));
    } else {
      out.children.push_back(std::move(c));
    }
  }
  if (out.children.empty()) return falsity();
  if (out.children.size() == 1) return std::move(out.children.front());
  return out;
}

bool BoolFormula::eval(const std::vector<bool>& atom_values) const {
  switch (kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: return atom_values.at(atom);
    case Kind::And:
      for (const auto& c : children)
        if (!c.eval(atom_values)) return false;
      return true;
    case Kind::Or:
      for (const auto& c : children)
        if (c.eval(atom_values)) return true;
      return false;
  }
  return false;
}

std::string VC::var_label(VarId v) const {
  const Provenance& p = varmap.at(v);
  auto port_name = [&](std::size_t a) { return a < ports.size() ? ports[a].network : "?"; };
  switch (p.kind) {
    case Provenance::Kind::NetInput: {
      const std::string vec = p.assignment < ports.size() ? ports[p.assignment].input : "?";
      return "input " + vec + "[" + std::to_string(p.index) + "] (assignment " + std::to_string(p.assignment) + ")";
    }
    case Provenance::Kind::NetNeuronPre:
    case Provenance::Kind::NetNeuronPost: {
      std::string s = std::string(p.kind == Provenance::Kind::NetNeuronPre ? "pre" : "post") + " " +
                      port_name(p.assignment) + "#" + std::to_string(p.assignment) + " layer " +
                      std::to_string(p.layer) + " neuron " + std::to_string(p.index);
      if (p.kind == Provenance::Kind::NetNeuronPost && p.assignment < ports.size()) {
        const auto& port = ports[p.assignment];
        if (p.index < port.outputs.size() && port.outputs[p.index] == v)
          s += " = " + port.output + "[" + std::to_string(p.index) + "]";
      }
      return s;
    }
    case Provenance::Kind::Auxiliary: return "auxiliary";
  }
  return "?";
}

NetworkEncoding encode_network(const Network& net, std::size_t assignment, VarAllocator& alloc,
                               const std::vector<VarId>* shared_inputs) {
  NetworkEncoding enc;
  if (shared_inputs) {
    if (shared_inputs->size() != net.input_dim)
      throw CompileError("shared input vector has the wrong dimension for '" + net.name + "'");
    enc.inputs = *shared_inputs;
  } else {
    for (std::size_t i = 0; i < net.input_dim; ++i)
      enc.inputs.push_back(alloc.fresh({Provenance::Kind::NetInput, assignment, 0, i}));
  }
  const std::vector<VarId>* prev = &enc.inputs;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& layer = net.layers[k];
    std::vector<VarId> pre_ids;
    std::vector<VarId> post_ids;
    for (std::size_t i = 0; i < layer.rows(); ++i) {
      const VarId y = alloc.fresh({Provenance::Kind::NetNeuronPre, assignment, k, i});
      const VarId x = alloc.fresh({Provenance::Kind::NetNeuronPost, assignment, k, i});
      // Y - sum(w * X_prev) = bias
      std::vector<std::pair<Rational, VarId>> terms;
      terms.emplace_back(Rational(1), y);
      for (std::size_t j = 0; j < layer.weights[i].size(); ++j)
        if (!layer.weights[i][j].is_zero()) terms.emplace_back(-layer.weights[i][j], (*prev)[j]);
      enc.hard.push_back(LinearConstraint::make(terms, RelOp::Eq, layer.bias[i]));
      if (layer.activation == Activation::ReLU) {
        enc.relus.push_back({y, x});
      } else {
        enc.hard.push_back(LinearConstraint::make({{Rational(1), x}, {Rational(-1), y}}, RelOp::Eq, Rational()));
      }
      pre_ids.push_back(y);
      post_ids.push_back(x);
    }
    enc.pre.push_back(std::move(pre_ids));
    enc.post.push_back(std::move(post_ids));
    prev = &enc.post.back();
  }
  enc.outputs = enc.post.back();
  return enc;
}

Formula nnf(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True:
    case K::False:
    case K::Atom: return f;
    case K::Not: return negate(f.children.at(0));
    case K::And:
    case K::Or: {
      Formula out{f.kind, {}, std::nullopt};
      for (const auto& c : f.children) out.children.push_back(nnf(c));
      return out;
    }
    case K::Implies: return Formula::disjunction({negate(f.children.at(0)), nnf(f.children.at(1))});
  }
  return f;
}

Formula negate(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True: return Formula::falsity();
    case K::False: return Formula::truth();
    case K::Atom: {
      const auto* c = std::get_if<CompareAtom>(&*f.atom);
      if (c == nullptr) throw CompileError("negate expects a desugared formula");
      auto atom = [](const LinearExpr& l, CmpOp op, const LinearExpr& r) {
        return Formula::make_atom(CompareAtom{l, op, r});
      };
      switch (c->op) {
        case CmpOp::Le: return atom(c->rhs, CmpOp::Lt, c->lhs);
        case CmpOp::Lt: return atom(c->rhs, CmpOp::Le, c->lhs);
        case CmpOp::Eq:
          return Formula::disjunction({atom(c->lhs, CmpOp::Lt, c->rhs), atom(c->rhs, CmpOp::Lt, c->lhs)});
        default: throw CompileError("negate expects a desugared formula");
      }
    }
    case K::Not: return nnf(f.children.at(0));
    case K::And:
    case K::Or: {
      Formula out{f.kind == K::And ? K::Or : K::And, {}, std::nullopt};
      for (const auto& c : f.children) out.children.push_back(negate(c));
      return out;
    }
    case K::Implies: return Formula::conjunction({nnf(f.children.at(0)), negate(f.children.at(1))});
  }
  return f;
}

namespace {

class SkeletonBuilder {
 public:
  SkeletonBuilder(VC& vc) : vc_(vc) {}  // NOLINT

  BoolFormula build(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind) {
      case K::True: return BoolFormula::truth();
      case K::False: return BoolFormula::falsity();
      case K::Atom: return atom(std::get<CompareAtom>(*f.atom));
      case K::And:
      case K::Or: {
        std::vector<BoolFormula> cs;
        for (const auto& c : f.children) cs.push_back(build(c));
        return f.kind == K::And ? BoolFormula::conjunction(std::move(cs)) : BoolFormula::disjunction(std::move(cs));
      }
      default: throw CompileError("skeleton must be in negation normal form");
    }
  }

 private:
  void add_terms(const LinearExpr& e, const Rational& sign, std::vector<std::pair<Rational, VarId>>& terms) {
    for (const auto& t : e.terms) {
      auto it = vc_.vector_vars.find(t.var.vec);
      if (it == vc_.vector_vars.end()) throw CompileError("unbound vector '" + t.var.vec + "'");
      if (t.var.index >= it->second.size())
        throw CompileError("index out of range for '" + t.var.vec + "'");
      terms.emplace_back(sign * t.coef, it->second[t.var.index]);
    }
  }

  BoolFormula atom(const CompareAtom& a) {
    std::vector<std::pair<Rational, VarId>> terms;
    add_terms(a.lhs, Rational(1), terms);
    add_terms(a.rhs, Rational(-1), terms);
    const RelOp op = a.op == CmpOp::Le ? RelOp::Le : (a.op == CmpOp::Lt ? RelOp::Lt : RelOp::Eq);
    LinearConstraint c = LinearConstraint::make(terms, op, a.rhs.constant - a.lhs.constant);
    if (c.terms.empty()) return c.holds({}) ? BoolFormula::truth() : BoolFormula::falsity();
    std::ostringstream key;
    for (const auto& [coef, v] : c.terms) key << coef << "*" << v << " ";
    key << to_string(c.op) << " " << c.rhs;
    auto [it, inserted] = index_.emplace(key.str(), vc_.atoms.size());
    if (inserted) vc_.atoms.push_back(std::move(c));
    return BoolFormula::leaf(it->second);
  }

  VC& vc_;
  std::map<std::string, std::size_t> index_;
};

void derive_boxes(VC& vc) {
  vc.box_lower.assign(vc.num_vars(), std::nullopt);
  vc.box_upper.assign(vc.num_vars(), std::nullopt);
  std::vector<const BoolFormula*> conjuncts;
  if (vc.skeleton.kind == BoolFormula::Kind::And) {
    for (const auto& c : vc.skeleton.children) conjuncts.push_back(&c);
  } else {
    conjuncts.push_back(&vc.skeleton);
  }
  for (const BoolFormula* c : conjuncts) {
    if (c->kind != BoolFormula::Kind::Atom) continue;
    const LinearConstraint& a = vc.atoms[c->atom];
    if (a.terms.size() != 1) continue;
    const auto& [coef, v] = a.terms.front();
    const Rational bound = a.rhs / coef;
    auto tighten_upper = [&] {
      if (!vc.box_upper[v] || bound < *vc.box_upper[v]) vc.box_upper[v] = bound;
    };
    auto tighten_lower = [&] {
      if (!vc.box_lower[v] || bound > *vc.box_lower[v]) vc.box_lower[v] = bound;
    };
    if (a.op == RelOp::Eq) {
      tighten_upper();
      tighten_lower();
    } else if (coef.sign() > 0) {
      tighten_upper();
    } else {
      tighten_lower();
    }
  }
}

}  // namespace

VC compile(const Property& prop, const NetworkMap& nets) {
  if (!prop.is_bound()) throw CompileError("property must be bound before compilation");
  const DimMap dims = prop.dims();
  VC vc;
  VarAllocator alloc;
  for (std::size_t i = 0; i < prop.assigns.size(); ++i) {
    const Assignment& a = prop.assigns[i];
    auto net_it = nets.find(a.network);
    if (net_it == nets.end()) throw CompileError("network '" + a.network + "' is not loaded");
    auto shared = vc.vector_vars.find(a.input);
    NetworkEncoding enc =
        encode_network(net_it->second, i, alloc, shared == vc.vector_vars.end() ? nullptr : &shared->second);
    vc.vector_vars[a.input] = enc.inputs;
    vc.vector_vars[a.output] = enc.outputs;
    for (auto& c : enc.hard) vc.hard.push_back(std::move(c));
    for (auto& r : enc.relus) vc.relus.push_back(r);
    vc.ports.push_back({a.output, a.network, a.input, enc.inputs, enc.outputs});
  }
  vc.varmap = alloc.release();

  const Formula pre = nnf(desugar(prop.pre, dims));
  const Formula not_post = negate(desugar(prop.post, dims));
  SkeletonBuilder builder(vc);
  BoolFormula pre_b = builder.build(pre);
  BoolFormula post_b = builder.build(not_post);
  vc.skeleton = BoolFormula::conjunction({std::move(pre_b), std::move(post_b)});
  derive_boxes(vc);
  return vc;
}

std::string render_varmap(const VC& vc) {
  std::ostringstream os;
  for (VarId v = 0; v < vc.num_vars(); ++v) os << "v" << v << " " << vc.var_label(v) << "\n";
  return os.str();
}

}  // namespace nesal
