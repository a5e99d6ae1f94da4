#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "nesal/property.hpp"

using namespace nesal;

namespace {

const char* kStopSign = R"(
# stop-sign detector agreement
nuv f: "f.json";
spec g: "g.json";
pre { x1 == x2 }
assign { y1 := f(x1); y2 := g(x2) }
post { argmax(y2) == 1 -> argmax(y1) == 3 }
)";

Network dense(std::size_t in, std::size_t out, const std::string& name) {
  Network n;
  n.name = name;
  n.input_dim = in;
  Layer l;
  l.weights.assign(out, Vector(in, Rational(1)));
  l.bias.assign(out, Rational(0));
  n.layers.push_back(l);
  return n;
}

PropertyError::Kind error_kind(const std::string& text, const NetworkMap* nets = nullptr) {
  try {
    const Property p = parse_property(text);
    if (nets) nesal::bind(p, *nets);
  } catch (const PropertyError& e) {
    return e.kind();
  }
  FAIL("expected a PropertyError");
  return PropertyError::Kind::Syntax;
}

}  // namespace

TEST_CASE("stop-sign triple") {
  const Property p = parse_property(kStopSign);
  REQUIRE(p.assigns.size() == 2);
  CHECK(p.assigns[0] == Assignment{"y1", "f", "x1"});
  CHECK(p.assigns[1] == Assignment{"y2", "g", "x2"});
  REQUIRE(p.networks.size() == 2);
  CHECK(p.find_network("f")->role == NetRole::Nuv);
  CHECK(p.find_network("g")->role == NetRole::Spec);
  CHECK(p.find_network("h") == nullptr);
  CHECK(p.post.kind == Formula::Kind::Implies);
  CHECK(p.pre.kind == Formula::Kind::Atom);
  CHECK(std::holds_alternative<VecEqAtom>(*p.pre.atom));
  CHECK(!p.is_bound());
}

TEST_CASE("undeclared vector is a binding error") {
  CHECK(error_kind(R"(nuv f: "f.json"; pre { true } assign { y := f(x) } post { z[0] <= 1 })") ==
        PropertyError::Kind::Bind);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_property("nuv f: \"f.json\";\npre { x[0] <= }");
    FAIL("expected an error");
  } catch (const PropertyError& e) {
    CHECK(e.kind() == PropertyError::Kind::Syntax);
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("implication is right-associative") {
  const Property p = parse_property(
      R"(nuv f: "f.json"; pre { true } assign { y := f(x) } post { y[0] <= 1 -> y[0] <= 2 -> y[0] <= 3 })");
  REQUIRE(p.post.kind == Formula::Kind::Implies);
  CHECK(p.post.children[0].kind == Formula::Kind::Atom);
  CHECK(p.post.children[1].kind == Formula::Kind::Implies);
}

TEST_CASE("precedence: ! binds tighter than && than ||") {
  const Property p = parse_property(
      R"(nuv f: "f.json"; pre { true } assign { y := f(x) } post { !y[0] <= 1 && y[0] <= 2 || y[0] <= 3 })");
  REQUIRE(p.post.kind == Formula::Kind::Or);
  REQUIRE(p.post.children[0].kind == Formula::Kind::And);
  CHECK(p.post.children[0].children[0].kind == Formula::Kind::Not);
}

TEST_CASE("bind annotates dimensions") {
  const NetworkMap nets{{"f", dense(2, 3, "f")}};
  const Property p =
      nesal::bind(parse_property(R"(nuv f: "f.json"; pre { true } assign { y1 := f(x1) } post { true })"), nets);
  CHECK(p.is_bound());
  CHECK(p.vectors.at("x1").dim == 2);
  CHECK(p.vectors.at("y1").dim == 3);
  CHECK(p.vectors.at("y1").role == VarRole::NetOutput);
}

TEST_CASE("bind dimension errors") {
  const NetworkMap nets{{"f", dense(2, 3, "f")}, {"g", dense(3, 1, "g")}};
  CHECK(error_kind(R"(nuv f: "f.json"; spec g: "g.json"; pre { true }
                     assign { y1 := f(x1); y2 := g(x1) } post { true })",
                   &nets) == PropertyError::Kind::Dimension);
  CHECK(error_kind(R"(nuv f: "f.json"; spec g: "g.json"; pre { x1 == x2 }
                     assign { y1 := f(x1); y2 := g(x2) } post { true })",
                   &nets) == PropertyError::Kind::Dimension);
  CHECK(error_kind(R"(nuv f: "f.json"; pre { x1[2] <= 0 } assign { y1 := f(x1) } post { true })", &nets) ==
        PropertyError::Kind::Dimension);
  CHECK(error_kind(R"(nuv f: "f.json"; pre { true } assign { y1 := f(x1) } post { argmax(y1) == 3 })", &nets) ==
        PropertyError::Kind::Dimension);
}

TEST_CASE("missing network is a binding error") {
  const NetworkMap nets;
  CHECK(error_kind(R"(nuv f: "f.json"; pre { true } assign { y1 := f(x1) } post { true })", &nets) ==
        PropertyError::Kind::Bind);
}

TEST_CASE("parse/render round trip and idempotent bind on random properties") {
  nesal::testing::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto inst = nesal::testing::random_instance(rng, 6, "rt" + std::to_string(i));
    const Property parsed = parse_property(inst.spec_text);
    CHECK(parse_property(render_property(parsed)) == parsed);
    CHECK(parse_property(render_property(inst.property)) == parsed);
    CHECK(nesal::bind(inst.property, inst.networks) == inst.property);
  }
}

TEST_CASE("stop-sign round trip") {
  const Property p = parse_property(kStopSign);
  CHECK(parse_property(render_property(p)) == p);
}
