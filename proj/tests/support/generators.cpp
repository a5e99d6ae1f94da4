#include "generators.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace nesal::testing {

namespace fs = std::filesystem;

namespace {

long long uniform(Rng& rng, long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); }

bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
  return xs[static_cast<std::size_t>(uniform(rng, 0, static_cast<long long>(xs.size()) - 1))];
}

}  // namespace

Rational random_rational(Rng& rng, int max_num, int max_den) {
  return Rational(uniform(rng, -max_num, max_num), uniform(rng, 1, max_den));
}

Rational random_in(Rng& rng, const Rational& lo, const Rational& hi, int den) {
  const Rational span = (hi - lo) * Rational(den);
  // number of grid steps that fit into [lo, hi]
  const mpz_class steps = span.numerator() / span.denominator();
  const long long k = uniform(rng, 0, steps.get_si());
  return lo + Rational(k, den);
}

Vector random_vector(Rng& rng, std::size_t dim, const Rational& lo, const Rational& hi, int den) {
  Vector v;
  for (std::size_t i = 0; i < dim; ++i) v.push_back(random_in(rng, lo, hi, den));
  return v;
}

Network random_network(Rng& rng, const NetShape& shape, const std::string& name, int max_num, int max_den) {
  Network net;
  net.name = name;
  net.input_dim = shape.input_dim;
  std::size_t cols = shape.input_dim;
  auto add_layer = [&](std::size_t rows, Activation act) {
    Layer l;
    l.activation = act;
    for (std::size_t i = 0; i < rows; ++i) {
      Vector row;
      for (std::size_t j = 0; j < cols; ++j) row.push_back(random_rational(rng, max_num, max_den));
      l.weights.push_back(std::move(row));
      l.bias.push_back(random_rational(rng, max_num, max_den));
    }
    net.layers.push_back(std::move(l));
    cols = rows;
  };
  for (std::size_t h : shape.hidden) add_layer(h, Activation::ReLU);
  add_layer(shape.output_dim, Activation::Linear);
  validate(net);
  return net;
}

Instance make_instance(const std::string& name, const std::string& spec_text, NetworkMap networks) {
  Instance inst;
  inst.name = name;
  inst.spec_text = spec_text;
  inst.networks = std::move(networks);
  inst.property = nesal::bind(parse_property(spec_text), inst.networks);
  inst.vc = compile(inst.property, inst.networks);
  return inst;
}

namespace {

std::vector<std::size_t> relu_widths(Rng& rng, std::size_t budget) {
  std::vector<std::size_t> widths;
  const std::size_t layers = static_cast<std::size_t>(uniform(rng, 1, 2));
  for (std::size_t i = 0; i < layers && budget > 0; ++i) {
    const std::size_t w = static_cast<std::size_t>(uniform(rng, 1, static_cast<long long>(std::min<std::size_t>(budget, 3))));
    widths.push_back(w);
    budget -= w;
  }
  if (widths.empty()) widths.push_back(1);
  return widths;
}

struct Vec {
  std::string name;
  std::size_t dim;
  Vector sample;  // value at the sampled point, used to pick interesting constants
};

std::string ref(const Vec& v, std::size_t i) { return v.name + "[" + std::to_string(i) + "]"; }

std::string cmp_op(Rng& rng) { return pick(rng, std::vector<std::string>{"<=", "<", ">=", ">", "==", "!="}); }

std::string random_compare(Rng& rng, const std::vector<Vec>& vecs) {
  const Vec& a = pick(rng, vecs);
  const std::size_t i = static_cast<std::size_t>(uniform(rng, 0, static_cast<long long>(a.dim) - 1));
  Rational value = a.sample[i];
  std::string lhs = ref(a, i);
  if (coin(rng, 0.4)) {
    const Vec& b = pick(rng, vecs);
    const std::size_t j = static_cast<std::size_t>(uniform(rng, 0, static_cast<long long>(b.dim) - 1));
    const Rational c = random_rational(rng, 3, 2);
    if (!c.is_zero()) {
      lhs += (c.sign() < 0 ? " - " : " + ") + c.abs().str() + "*" + ref(b, j);
      value += c * b.sample[j];
    }
  }
  // near the sampled value, so both outcomes are plausible
  const Rational bound = value + random_rational(rng, 2, 4);
  std::string op = cmp_op(rng);
  if (op == "==" || op == "!=") op = coin(rng) ? "<=" : ">";
  return lhs + " " + op + " " + bound.str();
}

std::string random_atom(Rng& rng, const std::vector<Vec>& vecs) {
  std::vector<std::pair<const Vec*, const Vec*>> pairs;
  for (const auto& a : vecs)
    for (const auto& b : vecs)
      if (&a < &b && a.dim == b.dim) pairs.emplace_back(&a, &b);
  const int kind = static_cast<int>(uniform(rng, 0, 9));
  if (kind <= 4) return random_compare(rng, vecs);
  if (kind <= 6) {
    std::vector<const Vec*> multi;
    for (const auto& v : vecs)
      if (v.dim >= 2) multi.push_back(&v);
    if (!multi.empty()) {
      const Vec& v = *pick(rng, multi);
      return "argmax(" + v.name + ") == " + std::to_string(uniform(rng, 0, static_cast<long long>(v.dim) - 1));
    }
    return random_compare(rng, vecs);
  }
  if (kind <= 8 && !pairs.empty()) {
    const auto& [a, b] = pick(rng, pairs);
    const std::string op = pick(rng, std::vector<std::string>{"<=", "<", ">", ">="});
    return "dist_inf(" + a->name + ", " + b->name + ") " + op + " " + Rational(uniform(rng, 0, 8), 4).str();
  }
  if (!pairs.empty()) {
    const auto& [a, b] = pick(rng, pairs);
    return a->name + " == " + b->name;
  }
  return random_compare(rng, vecs);
}

std::string random_formula(Rng& rng, const std::vector<Vec>& vecs, int depth) {
  if (depth == 0 || coin(rng, 0.35)) return random_atom(rng, vecs);
  switch (uniform(rng, 0, 3)) {
    case 0: return "!(" + random_formula(rng, vecs, depth - 1) + ")";
    case 1: return "(" + random_formula(rng, vecs, depth - 1) + ") && (" + random_formula(rng, vecs, depth - 1) + ")";
    case 2: return "(" + random_formula(rng, vecs, depth - 1) + ") || (" + random_formula(rng, vecs, depth - 1) + ")";
    default:
      return "(" + random_formula(rng, vecs, depth - 1) + ") -> (" + random_formula(rng, vecs, depth - 1) + ")";
  }
}

std::string box(const Vec& v, const Rational& lo, const Rational& hi) {
  std::string s;
  for (std::size_t i = 0; i < v.dim; ++i) {
    if (i) s += " && ";
    s += lo.str() + " <= " + ref(v, i) + " && " + ref(v, i) + " <= " + hi.str();
  }
  return s;
}

}  // namespace

Instance random_instance(Rng& rng, std::size_t max_relus, const std::string& name) {
  const int shape = static_cast<int>(uniform(rng, 0, 2));
  const std::size_t in_dim = static_cast<std::size_t>(uniform(rng, 1, 3));
  const std::size_t out_dim = static_cast<std::size_t>(uniform(rng, 1, 3));
  const Rational lo = Rational(uniform(rng, -4, 0), 2);
  const Rational hi = lo + Rational(uniform(rng, 1, 4), 2);

  NetworkMap nets;
  std::string decls;
  std::string assigns;
  std::string pre;
  std::vector<Vec> vecs;

  const std::size_t budget_f = shape == 1 ? std::max<std::size_t>(1, max_relus / 2) : max_relus;
  nets["f"] = random_network(rng, {in_dim, relu_widths(rng, budget_f), out_dim}, "f");
  decls = "nuv f: \"f.json\";\n";
  const Vector x = random_vector(rng, in_dim, lo, hi);

  if (shape == 0) {
    vecs = {{"x", in_dim, x}, {"y", out_dim, evaluate(nets["f"], x).output}};
    assigns = "y := f(x)";
    pre = box(vecs[0], lo, hi);
    if (coin(rng, 0.3)) pre += " && " + random_compare(rng, {vecs[0]});
  } else if (shape == 1) {
    const std::size_t used = nets["f"].relu_count();
    nets["g"] = random_network(rng, {in_dim, relu_widths(rng, max_relus - used), out_dim}, "g");
    decls += "spec g: \"g.json\";\n";
    vecs = {{"x", in_dim, x},
            {"y1", out_dim, evaluate(nets["f"], x).output},
            {"y2", out_dim, evaluate(nets["g"], x).output}};
    assigns = "y1 := f(x); y2 := g(x)";
    pre = box(vecs[0], lo, hi);
  } else {
    // one network twice; keep its relus within the budget for both copies
    nets["f"] = random_network(rng, {in_dim, relu_widths(rng, std::max<std::size_t>(1, max_relus / 2)), out_dim}, "f");
    const Vector x2 = random_vector(rng, in_dim, lo, hi);
    vecs = {{"x1", in_dim, x},
            {"x2", in_dim, x2},
            {"y1", out_dim, evaluate(nets["f"], x).output},
            {"y2", out_dim, evaluate(nets["f"], x2).output}};
    assigns = "y1 := f(x1); y2 := f(x2)";
    pre = box(vecs[0], lo, hi) + " && " + box(vecs[1], lo, hi);
    if (coin(rng)) {
      pre += " && dist_inf(x1, x2) <= " + Rational(uniform(rng, 0, 4), 4).str();
    } else if (in_dim > 1) {
      pre += " && x1[0] == x2[0]";
    }
  }
  const std::string post = random_formula(rng, vecs, 2);
  const std::string text = decls + "pre { " + pre + " }\nassign { " + assigns + " }\npost { " + post + " }\n";
  return make_instance(name, text, std::move(nets));
}

Instance p2_instance(std::uint64_t seed, std::size_t input_dim, std::size_t hidden) {
  Rng rng(seed);
  auto weight = [&](long long range, long long den) { return Rational(uniform(rng, -range, range), den); };

  Network f;
  f.name = "f";
  f.input_dim = input_dim;
  {
    Layer h{{}, {}, Activation::ReLU};
    for (std::size_t i = 0; i < hidden; ++i) {
      Vector row;
      for (std::size_t j = 0; j < input_dim; ++j) row.push_back(weight(10, 100));
      h.weights.push_back(row);
      h.bias.push_back(weight(10, 100));
    }
    Layer o{{}, {}, Activation::Linear};
    for (std::size_t i = 0; i < 10; ++i) {
      Vector row;
      for (std::size_t j = 0; j < hidden; ++j) row.push_back(weight(100, 100));
      o.weights.push_back(row);
      o.bias.push_back(weight(10, 100));
    }
    f.layers = {h, o};
  }
  Network g;
  g.name = "g";
  g.input_dim = input_dim;
  {
    Layer enc{{}, {}, Activation::ReLU};
    for (std::size_t i = 0; i < hidden; ++i) {
      Vector row;
      for (std::size_t j = 0; j < input_dim; ++j) row.push_back(weight(10, 100));
      enc.weights.push_back(row);
      enc.bias.push_back(weight(10, 100));
    }
    Layer dec{{}, {}, Activation::Linear};
    for (std::size_t i = 0; i < input_dim; ++i) {
      Vector row;
      for (std::size_t j = 0; j < hidden; ++j) row.push_back(weight(5, 100));
      dec.weights.push_back(row);
      dec.bias.push_back(Rational(1, 2));
    }
    g.layers = {enc, dec};
  }
  validate(f);
  validate(g);

  const Vector mid(input_dim, Rational(1, 2));
  const Vector y = evaluate(f, mid).output;
  std::size_t c = 0;
  for (std::size_t j = 1; j < y.size(); ++j)
    if (y[j] > y[c]) c = j;

  std::ostringstream post;
  post << "(dist_inf(y2, x) <= 1/10 && argmax(y1) == " << c << ") -> 10*y1[" << c << "]";
  for (std::size_t j = 0; j < 10; ++j)
    if (j != c) post << " - y1[" << j << "]";
  post << " > 20";
  std::ostringstream text;
  text << "nuv f: \"f.json\";\nspec g: \"g.json\";\npre { ";
  for (std::size_t i = 0; i < input_dim; ++i) text << (i ? " && " : "") << "0 <= x[" << i << "] && x[" << i << "] <= 1";
  text << " }\nassign { y1 := f(x); y2 := g(x) }\npost { " << post.str() << " }\n";
  return make_instance("p2-seed" + std::to_string(seed), text.str(), {{"f", f}, {"g", g}});
}

fs::path write_instance(const Instance& inst, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, net] : inst.networks) {
    std::ofstream(dir / (name + ".json")) << render_network(net);
  }
  const fs::path spec = dir / "spec.nesal";
  std::ofstream(spec) << inst.spec_text;
  return spec;
}

Model trace_model(const VC& vc, const NetworkMap& nets, const Env& inputs) {
  Model m(vc.num_vars());
  for (std::size_t a = 0; a < vc.ports.size(); ++a) {
    const Port& port = vc.ports[a];
    const EvalResult r = evaluate(nets.at(port.network), inputs.at(port.input));
    for (VarId v = 0; v < vc.num_vars(); ++v) {
      const Provenance& p = vc.varmap[v];
      if (p.assignment != a) continue;
      switch (p.kind) {
        case Provenance::Kind::NetInput: m[v] = inputs.at(port.input).at(p.index); break;
        case Provenance::Kind::NetNeuronPre: m[v] = r.trace.pre.at(p.layer).at(p.index); break;
        case Provenance::Kind::NetNeuronPost: m[v] = r.trace.post.at(p.layer).at(p.index); break;
        case Provenance::Kind::Auxiliary: break;
      }
    }
  }
  return m;
}

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("nesal-test-" + std::to_string(::getpid()) + "-" + tag + "-" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace nesal::testing
