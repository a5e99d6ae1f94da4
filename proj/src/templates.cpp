#include "nesal/templates.hpp"

#include <sstream>

namespace nesal {

TemplateKind parse_template_kind(const std::string& name) {
  if (name == "p1") return TemplateKind::P1;
  if (name == "p2") return TemplateKind::P2;
  if (name == "p2prime") return TemplateKind::P2Prime;
  if (name == "p3") return TemplateKind::P3;
  if (name == "robustness") return TemplateKind::Robustness;
  if (name == "fairness") return TemplateKind::Fairness;
  throw TemplateError("unknown template '" + name + "' (expected p1, p2, p2prime, p3, robustness or fairness)");
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <typename T>
const T& need(const std::optional<T>& v, const char* what) {
  if (!v) throw TemplateError(std::string("missing parameter: ") + what);
  return *v;
}

void need_path(const std::string& p, const char* what) {
  if (p.empty()) throw TemplateError(std::string("missing parameter: ") + what);
}

std::size_t need_class(const TemplateParams& p) {
  const std::size_t c = need(p.cls, "class");
  if (p.output_dim == 0) throw TemplateError("missing parameter: output dimension");
  if (c >= p.output_dim)
    throw TemplateError("class " + std::to_string(c) + " out of range for output dimension " +
                        std::to_string(p.output_dim));
  return c;
}

std::string box_formula(const TemplateParams& p, const std::vector<std::string>& vecs) {
  if (!p.box) return "true";
  if (p.input_dim == 0) throw TemplateError("missing parameter: input dimension");
  std::vector<std::string> atoms;
  for (const auto& v : vecs)
    for (std::size_t i = 0; i < p.input_dim; ++i) {
      const std::string ref = v + "[" + std::to_string(i) + "]";
      atoms.push_back(p.box->first.str() + " <= " + ref);
      atoms.push_back(ref + " <= " + p.box->second.str());
    }
  std::string s;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) s += (i % 2 == 0) ? " &&\n    " : " && ";
    s += atoms[i];
  }
  return s;
}

std::string conj(const std::string& a, const std::string& b) {
  if (a == "true") return b;
  if (b == "true") return a;
  return a + " &&\n    " + b;
}

std::string confidence(std::size_t c, std::size_t n, const Rational& delta) {
  std::string s = std::to_string(n) + "*y1[" + std::to_string(c) + "]";
  for (std::size_t j = 0; j < n; ++j)
    if (j != c) s += " - y1[" + std::to_string(j) + "]";
  return s + " > " + (Rational(static_cast<long long>(n)) * delta).str();
}

}  // namespace

std::string render_template(const TemplateParams& p) {
  need_path(p.nuv, "nuv network");
  std::ostringstream os;
  os << "nuv f: " << quote(p.nuv) << ";\n";
  std::string pre = "true";
  std::string assigns;
  std::string post;
  switch (p.kind) {
    case TemplateKind::P1: {
      need_path(p.spec, "spec network");
      const std::size_t c = need_class(p);
      os << "spec g: " << quote(p.spec) << ";\n";
      pre = box_formula(p, {"x"});
      assigns = "y1 := f(x); y2 := g(x)";
      post = "y2[1] > y2[0] -> argmax(y1) == " + std::to_string(c);
      break;
    }
    case TemplateKind::P2: {
      need_path(p.spec, "spec network");
      const std::size_t c = need_class(p);
      const Rational& eps = need(p.epsilon, "epsilon");
      const Rational& delta = need(p.delta, "delta");
      os << "spec g: " << quote(p.spec) << ";\n";
      pre = box_formula(p, {"x"});
      assigns = "y1 := f(x); y2 := g(x)";
      post = "(dist_inf(y2, x) <= " + eps.str() + " && argmax(y1) == " + std::to_string(c) + ") -> " +
             confidence(c, p.output_dim, delta);
      break;
    }
    case TemplateKind::P2Prime: {
      const std::size_t c = need_class(p);
      const Rational& delta = need(p.delta, "delta");
      pre = box_formula(p, {"x"});
      assigns = "y1 := f(x)";
      post = "argmax(y1) == " + std::to_string(c) + " -> " + confidence(c, p.output_dim, delta);
      break;
    }
    case TemplateKind::P3: {
      need_path(p.spec, "spec network");
      const Rational& eps = need(p.epsilon, "epsilon");
      os << "spec g: " << quote(p.spec) << ";\n";
      pre = box_formula(p, {"x"});
      assigns = "y1 := f(x); y2 := g(x)";
      post = "dist_inf(y1, y2) <= " + eps.str();
      break;
    }
    case TemplateKind::Robustness: {
      const Rational& eps = need(p.epsilon, "epsilon");
      if (p.point.empty()) throw TemplateError("missing parameter: point");
      if (p.input_dim && p.point.size() != p.input_dim)
        throw TemplateError("point has " + std::to_string(p.point.size()) + " components, network expects " +
                            std::to_string(p.input_dim));
      std::string centre;
      for (std::size_t i = 0; i < p.point.size(); ++i)
        centre += (i ? " && " : "") + std::string("xs[") + std::to_string(i) + "] == " + p.point[i].str();
      pre = conj(centre, "dist_inf(xs, x) <= " + eps.str());
      if (p.box) {
        TemplateParams q = p;
        q.input_dim = p.point.size();
        pre = conj(pre, box_formula(q, {"x"}));
      }
      assigns = "ys := f(xs); y := f(x)";
      post = "ys == y";
      break;
    }
    case TemplateKind::Fairness: {
      const std::size_t s = need(p.sensitive, "sensitive feature");
      if (p.input_dim == 0) throw TemplateError("missing parameter: input dimension");
      if (s >= p.input_dim)
        throw TemplateError("sensitive feature " + std::to_string(s) + " out of range for input dimension " +
                            std::to_string(p.input_dim));
      std::string same;
      for (std::size_t i = 0; i < p.input_dim; ++i) {
        if (i == s) continue;
        if (!same.empty()) same += " && ";
        same += "x1[" + std::to_string(i) + "] == x2[" + std::to_string(i) + "]";
      }
      pre = conj(same.empty() ? "true" : same, box_formula(p, {"x1", "x2"}));
      assigns = "y1 := f(x1); y2 := f(x2)";
      post = "y1 == y2";
      break;
    }
  }
  os << "pre { " << pre << " }\n";
  os << "assign { " << assigns << " }\n";
  os << "post { " << post << " }\n";
  return os.str();
}

}  // namespace nesal
