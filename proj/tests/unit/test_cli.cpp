#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "generators.hpp"
#include "nesal/cli.hpp"
#include "nesal/templates.hpp"

using namespace nesal;
using namespace nesal::testing;
namespace fs = std::filesystem;

namespace {

const std::string kData = NESAL_TEST_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string post_line(const std::string& spec) {
  const auto p = spec.find("post {");
  return spec.substr(p, spec.find('\n', p) - p);
}

}  // namespace

TEST_CASE("eval") {
  CHECK(cli({"eval", kData + "/identity.json", "7/2"}).out == "7/2\n");
  CHECK(cli({"eval", kData + "/small_relu.json", "1,2"}).out == "3/2\n");
  CHECK(cli({"eval", kData + "/small_relu.json", "1"}).code == 3);
  CHECK(cli({"eval", kData + "/missing.json", "1"}).code == 3);
}

TEST_CASE("verify exit codes and report shape") {
  const Run falsified = cli({"verify", kData + "/robust.nesal"});
  CHECK(falsified.code == 1);
  const auto report = nlohmann::json::parse(falsified.out);
  CHECK(report["result"] == "falsified");
  CHECK(report["tool"]["name"] == "nesal");
  REQUIRE(report["counterexample"].size() == 2);
  CHECK(report["counterexample"][0]["network"] == "f");
  CHECK(report["counterexample"][1]["network"] == "f");
  CHECK(report["statistics"].contains("splits"));
  CHECK(report["statistics"].contains("pivots"));
  CHECK(!report["statistics"].contains("time_ms"));

  const Run verified = cli({"verify", kData + "/p3_same.nesal"});
  CHECK(verified.code == 0);
  CHECK(nlohmann::json::parse(verified.out)["result"] == "verified");
  CHECK(!nlohmann::json::parse(verified.out).contains("counterexample"));

  const Run timed = cli({"verify", kData + "/p3_same.nesal", "--timing"});
  CHECK(nlohmann::json::parse(timed.out)["statistics"].contains("time_ms"));
}

TEST_CASE("verify errors") {
  CHECK(cli({"verify", kData + "/missing_network.nesal"}).code == 3);
  CHECK(cli({"verify", kData + "/robust.nesal", "--network", "nosuch=x.json"}).code == 3);
  CHECK(cli({"verify", kData + "/robust.nesal", "--backend", "magic"}).code == 3);
  CHECK(cli({"verify"}).code == 3);
  CHECK(cli({"frobnicate"}).code == 3);
}

TEST_CASE("verify with a network override") {
  CHECK(cli({"verify", kData + "/p3_same.nesal", "--network", "g=" + kData + "/small_relu_shifted.json"}).code == 1);
}

TEST_CASE("verify is byte-identical across runs") {
  const Run a = cli({"verify", kData + "/robust.nesal", "--seed", "5"});
  const Run b = cli({"verify", kData + "/robust.nesal", "--seed", "5"});
  CHECK(a.out == b.out);
}

TEST_CASE("export") {
  const auto dir = scratch_dir("cli-export");
  const auto out = dir / "vc.smt2";
  CHECK(cli({"export", kData + "/robust.nesal", out.string()}).code == 0);
  CHECK(slurp(out).rfind("(set-logic QF_LRA)", 0) == 0);
  CHECK(cli({"export", kData + "/robust.nesal", (dir / "no" / "such" / "dir" / "vc.smt2").string()}).code == 3);
}

TEST_CASE("check-cex") {
  const auto dir = scratch_dir("cli-cex");
  const auto report = dir / "report.json";
  REQUIRE(cli({"verify", kData + "/robust.nesal", "--out", report.string()}).code == 1);
  CHECK(cli({"check-cex", kData + "/robust.nesal", report.string()}).code == 0);

  // tamper with one output value
  auto j = nlohmann::json::parse(slurp(report));
  j["counterexample"][1]["output"]["values"][0] = "1000";
  std::ofstream(dir / "bad.json") << j.dump(2);
  const Run bad = cli({"check-cex", kData + "/robust.nesal", (dir / "bad.json").string()});
  CHECK(bad.code == 1);
  CHECK((bad.out + bad.err).find("output y[0] of f") != std::string::npos);

  const auto verified = dir / "verified.json";
  REQUIRE(cli({"verify", kData + "/p3_same.nesal", "--out", verified.string()}).code == 0);
  CHECK(cli({"check-cex", kData + "/p3_same.nesal", verified.string()}).code == 3);
}

TEST_CASE("template posts") {
  const std::string n10 = kData + "/dense4x10.json";
  CHECK(post_line(cli({"template", "p3", "--nuv", n10, "--spec", n10, "--epsilon", "1/20"}).out) ==
        "post { dist_inf(y1, y2) <= 1/20 }");
  CHECK(post_line(cli({"template", "p1", "--nuv", n10, "--spec", kData + "/dense4x2.json", "--class", "3"}).out) ==
        "post { y2[1] > y2[0] -> argmax(y1) == 3 }");
  CHECK(post_line(cli({"template", "p2", "--nuv", n10, "--spec", kData + "/dense4x4.json", "--class", "0", "--epsilon",
                       "1/10", "--delta", "2"})
                      .out) ==
        "post { (dist_inf(y2, x) <= 1/10 && argmax(y1) == 0) -> "
        "10*y1[0] - y1[1] - y1[2] - y1[3] - y1[4] - y1[5] - y1[6] - y1[7] - y1[8] - y1[9] > 20 }");
  CHECK(cli({"template", "p1", "--nuv", n10, "--spec", kData + "/dense4x2.json", "--class", "10"}).code == 3);
  CHECK(cli({"template", "p3", "--nuv", n10}).code == 3);
  CHECK(cli({"template", "p9", "--nuv", n10}).code == 3);
}

TEST_CASE("rendered templates parse") {
  TemplateParams p;
  p.kind = TemplateKind::Fairness;
  p.nuv = "f.json";
  p.input_dim = 3;
  p.output_dim = 2;
  p.sensitive = 0;
  const Property prop = parse_property(render_template(p));
  CHECK(prop.assigns.size() == 2);
  p.sensitive = 3;
  CHECK_THROWS_AS(render_template(p), TemplateError);
  CHECK(parse_template_kind("p2prime") == TemplateKind::P2Prime);
  CHECK_THROWS_AS(parse_template_kind("p4"), TemplateError);
}

TEST_CASE("help and version") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"--version"}).out.find(kToolVersion) != std::string::npos);
}
