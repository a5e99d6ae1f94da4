#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <regex>

#include "generators.hpp"
#include "nesal/smtlib.hpp"

using namespace nesal;
using namespace nesal::testing;

namespace {

Network relu1() {
  Network n;
  n.name = "relu";
  n.input_dim = 1;
  n.layers.push_back({{{Rational(1)}}, {Rational(0)}, Activation::ReLU});
  return n;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

VC one_var_vc() {
  VC vc;
  vc.varmap.resize(1);
  return vc;
}

std::string run_z3(const std::string& doc) {
  const auto dir = scratch_dir("smt");
  const auto path = (dir / "q.smt2").string();
  std::ofstream(path) << doc;
  std::string out;
  if (FILE* p = ::popen(("z3 " + path + " 2>&1").c_str(), "r")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    ::pclose(p);
  }
  return out;
}

bool have_z3() { return std::system("z3 -version > /dev/null 2>&1") == 0; }

}  // namespace

TEST_CASE("rational terms") {
  CHECK(smt2_rational(Rational(3)) == "3");
  CHECK(smt2_rational(Rational(-3)) == "(- 3)");
  CHECK(smt2_rational(Rational(1, 2)) == "(/ 1 2)");
  CHECK(smt2_rational(Rational(-1, 2)) == "(- (/ 1 2))");
}

TEST_CASE("export structure") {
  const auto inst = make_instance("e", R"(nuv f: "f.json"; pre { x[0] >= -1 } assign { y := f(x) } post { y[0] <= 5 })",
                                  {{"f", relu1()}});
  const std::string doc = export_smt2(inst.vc);
  CHECK(doc.rfind("(set-logic QF_LRA)", 0) == 0);
  CHECK(count(doc, "(declare-const ") == inst.vc.num_vars());
  const auto& r = inst.vc.relus[0];
  const std::string y = "v" + std::to_string(r.pre), x = "v" + std::to_string(r.post);
  CHECK(doc.find("(=> (<= " + y + " 0) (= " + x + " 0))") != std::string::npos);
  CHECK(doc.find("(=> (> " + y + " 0) (= " + x + " " + y + "))") != std::string::npos);
  CHECK(doc.find("(check-sat)") != std::string::npos);
}

TEST_CASE("import examples") {
  CHECK(import_model("((v0 (/ 1 2)))", one_var_vc()) == Model{Rational(1, 2)});
  CHECK(import_model("sat\n((v0 (- (/ 3 4))))", one_var_vc()) == Model{Rational(-3, 4)});
  CHECK(import_model("(model (define-fun v0 () Real (- 2.5)))", one_var_vc()) == Model{Rational(-5, 2)});
  CHECK(import_model("((define-fun v0 () Real (/ (- 1) 3)))", one_var_vc()) == Model{Rational(-1, 3)});
  VC two;
  two.varmap.resize(2);
  try {
    import_model("((v0 1))", two);
    FAIL("expected an error");
  } catch (const SmtError& e) {
    CHECK(std::string(e.what()).find("v1") != std::string::npos);
  }
  CHECK_THROWS_AS(import_model("unsat", one_var_vc()), SmtError);
  CHECK_THROWS_AS(import_model("((v0 (/ 1 2)", one_var_vc()), SmtError);
}

TEST_CASE("external solver agrees on unsat and sat documents") {
  if (!have_z3()) return;
  const auto unsat = make_instance("u", R"(nuv f: "f.json"; pre { true } assign { y := f(x) } post { true })",
                                   {{"f", relu1()}});
  CHECK(run_z3(export_smt2(unsat.vc)).rfind("unsat", 0) == 0);

  const auto sat = make_instance("s", R"(nuv f: "f.json"; pre { x[0] >= -1 && x[0] <= 1 } assign { y := f(x) } post { y[0] <= 1/2 })",
                                 {{"f", relu1()}});
  const std::string out = run_z3(export_smt2(sat.vc));
  REQUIRE(out.rfind("sat", 0) == 0);
  const Model m = import_model(out, sat.vc);
  CHECK(check_model(sat.vc, m).empty());
}
