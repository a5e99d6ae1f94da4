#include "nesal/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "exact_json.hpp"
#include "nesal/smtlib.hpp"
#include "nesal/templates.hpp"

namespace nesal {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string("cannot read ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw std::runtime_error(std::string("cannot write ") + what + " '" + path + "'");
}

ojson rationals(const Vector& v) {
  ojson a = ojson::array();
  for (const auto& r : v) a.push_back(r.str());
  return a;
}

std::string assignment_text(const Assignment& a) { return a.output + " := " + a.network + "(" + a.input + ")"; }

}  // namespace

LoadedSpec load_spec(const std::string& spec_path, const std::map<std::string, std::string>& overrides) {
  const std::string text = read_file(spec_path, "spec file");
  Property parsed = parse_property(text);
  for (const auto& [name, path] : overrides)
    if (!parsed.find_network(name)) throw std::runtime_error("--network override names unknown network '" + name + "'");
  const std::string base = fs::path(spec_path).parent_path().string();
  LoadedSpec s;
  s.networks = load_declared_networks(parsed, base, overrides);
  s.property = nesal::bind(parsed, s.networks);
  s.vc = compile(s.property, s.networks);
  return s;
}

std::string render_report(const SolverResult& result, const VC& vc, const Property& prop, const ReportConfig& config) {
  ojson r;
  r["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  r["config"] = {{"spec", config.spec},
                 {"backend", config.backend},
                 {"threads", config.threads},
                 {"seed", config.seed},
                 {"timeout_s", config.timeout_seconds}};
  r["result"] = std::string(to_string(result.verdict));
  if (result.verdict == Verdict::Unknown) r["reason"] = result.unknown_reason;
  ojson stats = {{"splits", result.stats.splits},
                 {"decisions", result.stats.decisions},
                 {"pivots", result.stats.pivots},
                 {"propagations", result.stats.propagations}};
  if (config.timing) stats["time_ms"] = result.stats.elapsed_ms;
  r["statistics"] = stats;
  if (result.verdict == Verdict::Falsified) {
    if (!result.model) throw std::logic_error("falsified result without a model");
    ojson cex = ojson::array();
    const auto records = extract_counterexample(*result.model, vc);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      cex.push_back({{"assignment", i < prop.assigns.size() ? assignment_text(prop.assigns[i]) : ""},
                     {"network", rec.network},
                     {"input", {{"name", rec.input}, {"values", rationals(rec.input_values)}}},
                     {"output", {{"name", rec.output}, {"values", rationals(rec.output_values)}}}});
    }
    r["counterexample"] = cex;
  }
  if (config.threads > 1)
    r["note"] = "parallel search: the verdict is deterministic, the counterexample found may vary between runs";
  return r.dump(2) + "\n";
}

ReplayOutcome replay_report(const LoadedSpec& spec, const std::string& report_text) {
  nlohmann::json report;
  try {
    report = detail::parse_exact_json(report_text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("report is not valid JSON: ") + e.what());
  }
  if (!report.is_object() || !report.contains("result") || !report["result"].is_string())
    throw std::runtime_error("report has no result field");
  const std::string result = report["result"];
  if (result != "falsified") return {3, "nothing to check: result is \"" + result + "\""};
  if (!report.contains("counterexample") || !report["counterexample"].is_array())
    return {1, "falsified report has no counterexample"};

  const Property& prop = spec.property;
  const auto& cex = report["counterexample"];
  if (cex.size() != prop.assigns.size())
    return {1, "counterexample has " + std::to_string(cex.size()) + " records, the property has " +
                   std::to_string(prop.assigns.size()) + " assignments"};

  auto values_of = [](const nlohmann::json& side, const std::string& what) {
    if (!side.is_object() || !side.contains("values") || !side["values"].is_array())
      throw std::runtime_error("counterexample " + what + " has no values");
    Vector v;
    for (const auto& x : side["values"]) v.push_back(detail::rational_from_json(x));
    return v;
  };

  Env env;
  for (std::size_t i = 0; i < cex.size(); ++i) {
    const Assignment& a = prop.assigns[i];
    const auto& rec = cex[i];
    const std::string where = "record " + std::to_string(i) + " (" + assignment_text(a) + ")";
    if (rec.value("network", "") != a.network) return {1, where + ": network name differs"};
    if (!rec.contains("input") || rec["input"].value("name", "") != a.input) return {1, where + ": input name differs"};
    if (!rec.contains("output") || rec["output"].value("name", "") != a.output)
      return {1, where + ": output name differs"};
    const Vector input = values_of(rec["input"], "input");
    const Vector output = values_of(rec["output"], "output");
    const Network& net = spec.networks.at(a.network);
    if (input.size() != net.input_dim)
      return {1, where + ": input " + a.input + " has " + std::to_string(input.size()) + " values, expected " +
                     std::to_string(net.input_dim)};
    if (output.size() != net.output_dim())
      return {1, where + ": output " + a.output + " has " + std::to_string(output.size()) + " values, expected " +
                     std::to_string(net.output_dim())};
    const Vector replayed = evaluate(net, input).output;
    for (std::size_t k = 0; k < replayed.size(); ++k)
      if (replayed[k] != output[k])
        return {1, "output " + a.output + "[" + std::to_string(k) + "] of " + a.network + ": report says " +
                       output[k].str() + ", replay gives " + replayed[k].str()};
    if (auto it = env.find(a.input); it != env.end()) {
      for (std::size_t k = 0; k < input.size(); ++k)
        if (it->second[k] != input[k])
          return {1, "input " + a.input + "[" + std::to_string(k) + "] differs between records: " +
                         it->second[k].str() + " vs " + input[k].str()};
    }
    env[a.input] = input;
    env[a.output] = replayed;
  }
  const DimMap dims = prop.dims();
  if (!eval_formula(desugar(prop.pre, dims), env)) return {1, "pre-condition does not hold on the counterexample"};
  if (eval_formula(desugar(prop.post, dims), env))
    return {1, "post-condition holds on the counterexample, so it is not a violation"};
  return {0, "counterexample replays: outputs reproduced, pre holds, post fails"};
}

namespace {

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw std::runtime_error("--network expects NAME=PATH, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

Vector parse_csv(const std::string& text) {
  Vector v;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t\r\n");
    if (b != std::string::npos) {
      const auto e = cur.find_last_not_of(" \t\r\n");
      v.push_back(Rational::parse(cur.substr(b, e - b + 1)));
    }
    cur.clear();
  };
  for (char c : text) {
    if (c == ',' || c == '\n') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return v;
}

std::string find_on_path(const std::string& name) {
  const char* path = std::getenv("PATH");
  if (!path) return {};
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    const fs::path candidate = fs::path(dir) / name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate.string();
  }
  return {};
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Optional glue: hands the exported document to an external SMT solver.
SolverResult solve_external(const VC& vc, std::string solver, double timeout_seconds) {
  if (solver.empty())
    if (const char* env = std::getenv("NESAL_SMT_SOLVER")) solver = env;
  if (solver.empty()) solver = find_on_path("z3");
  if (solver.empty()) solver = find_on_path("cvc5");
  if (solver.empty())
    throw std::runtime_error("no external SMT solver found (use --smt-solver, NESAL_SMT_SOLVER, or put z3 on PATH)");

  static std::atomic<unsigned> counter{0};
  const fs::path file = fs::temp_directory_path() / ("nesal-" + std::to_string(::getpid()) + "-" +
                                                     std::to_string(counter++) + ".smt2");
  write_file(file.string(), export_smt2(vc), "temporary SMT-LIB file");

  const std::string base = fs::path(solver).filename().string();
  std::string cmd = shell_quote(solver);
  const long secs = static_cast<long>(timeout_seconds < 1 ? 1 : timeout_seconds);
  if (base.find("z3") != std::string::npos) cmd += " -T:" + std::to_string(secs);
  if (base.find("cvc5") != std::string::npos) cmd += " --produce-models --tlimit=" + std::to_string(secs * 1000);
  cmd += " " + shell_quote(file.string()) + " 2>&1";

  const auto start = std::chrono::steady_clock::now();
  std::string output;
  if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    ::pclose(pipe);
  } else {
    fs::remove(file);
    throw std::runtime_error("cannot run external solver '" + solver + "'");
  }
  fs::remove(file);

  SolverResult result;
  result.stats.elapsed_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  std::istringstream lines(output);
  std::string first;
  while (std::getline(lines, first) && first.find_first_not_of(" \t\r") == std::string::npos) {
  }
  first.erase(first.find_last_not_of(" \t\r") + 1);
  if (first == "unsat") {
    result.verdict = Verdict::Verified;
  } else if (first == "sat") {
    std::string rest((std::istreambuf_iterator<char>(lines)), std::istreambuf_iterator<char>());
    Model m = import_model(rest, vc);
    if (auto err = check_model(vc, m); !err.empty())
      throw std::runtime_error("external solver returned a model that fails replay: " + err);
    result.verdict = Verdict::Falsified;
    result.model = std::move(m);
  } else if (first == "unknown" || first == "timeout") {
    result.verdict = Verdict::Unknown;
    result.unknown_reason = "external solver: " + first;
  } else {
    throw std::runtime_error("unexpected external solver output: " + output.substr(0, 200));
  }
  return result;
}

struct VerifyOpts {
  std::string spec;
  std::vector<std::string> networks;
  double timeout = 1800;
  std::string backend = "builtin";
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::uint64_t max_splits = 0;
  std::string out;
  std::string smt_solver;
  bool timing = false;
};

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
  const LoadedSpec spec = load_spec(o.spec, parse_overrides(o.networks));
  SolverResult result;
  if (o.backend == "smt2") {
    result = solve_external(spec.vc, o.smt_solver, o.timeout);
  } else {
    SolverConfig cfg;
    cfg.timeout_seconds = o.timeout;
    cfg.threads = o.threads;
    cfg.seed = o.seed;
    cfg.max_splits = o.max_splits;
    result = solve(spec.vc, cfg);
  }
  ReportConfig rc{o.spec, o.backend, o.threads, o.seed, o.timeout, o.timing};
  const std::string report = render_report(result, spec.vc, spec.property, rc);
  if (o.out.empty()) {
    out << report;
  } else {
    write_file(o.out, report, "report");
    out << to_string(result.verdict) << "\n";
  }
  switch (result.verdict) {
    case Verdict::Verified: return 0;
    case Verdict::Falsified: return 1;
    case Verdict::Unknown: return 2;
  }
  return 2;
}

struct TemplateOpts {
  std::string kind;
  std::string nuv, spec;
  std::optional<std::size_t> cls, sensitive, input_dim, output_dim;
  std::string epsilon, delta, point;
  bool no_box = false;
  std::string box_lo = "0", box_hi = "1";
  std::string out;
};

int cmd_template(const TemplateOpts& o, std::ostream& out) {
  TemplateParams p;
  p.kind = parse_template_kind(o.kind);
  p.nuv = o.nuv;
  p.spec = o.spec;
  p.cls = o.cls;
  p.sensitive = o.sensitive;
  if (!o.epsilon.empty()) p.epsilon = Rational::parse(o.epsilon);
  if (!o.delta.empty()) p.delta = Rational::parse(o.delta);
  if (!o.point.empty()) p.point = parse_csv(o.point);
  if (o.no_box) {
    p.box.reset();
  } else {
    p.box = std::make_pair(Rational::parse(o.box_lo), Rational::parse(o.box_hi));
  }
  std::optional<Network> nuv;
  if (!o.nuv.empty() && (!o.input_dim || !o.output_dim)) nuv = load_network_file(o.nuv);
  p.input_dim = o.input_dim ? *o.input_dim : nuv ? nuv->input_dim : 0;
  p.output_dim = o.output_dim ? *o.output_dim : nuv ? nuv->output_dim() : 0;

  const std::string text = render_template(p);
  const Property parsed = parse_property(text);  // templates must always re-parse
  if (nuv) {
    NetworkMap nets{{"f", *nuv}};
    if (parsed.find_network("g")) nets.emplace("g", load_network_file(o.spec));
    nesal::bind(parsed, nets);
  }
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text, "spec file");
  }
  return 0;
}

int cmd_eval(const std::string& network, const std::string& input, const std::string& input_file, std::ostream& out) {
  const Network net = load_network_file(network);
  if (!input.empty() && !input_file.empty()) throw std::runtime_error("give the input either inline or as --input-file");
  const Vector x = parse_csv(input_file.empty() ? input : read_file(input_file, "input file"));
  for (const auto& y : evaluate(net, x).output) out << y.str() << "\n";
  return 0;
}

int cmd_export(const std::string& spec_path, const std::string& out_path, const std::vector<std::string>& networks,
               std::ostream& out) {
  const LoadedSpec spec = load_spec(spec_path, parse_overrides(networks));
  write_file(out_path, export_smt2(spec.vc), "SMT-LIB file");
  out << "wrote " << out_path << " (" << spec.vc.num_vars() << " variables)\n";
  return 0;
}

int cmd_check_cex(const std::string& spec_path, const std::string& report_path,
                  const std::vector<std::string>& networks, std::ostream& out, std::ostream& err) {
  const LoadedSpec spec = load_spec(spec_path, parse_overrides(networks));
  const ReplayOutcome r = replay_report(spec, read_file(report_path, "report"));
  (r.exit_code == 0 ? out : err) << r.message << "\n";
  return r.exit_code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deductive verifier for neuro-symbolic properties of ReLU networks", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  VerifyOpts vo;
  auto* verify = app.add_subcommand("verify", "Verify a property file");
  verify->add_option("spec", vo.spec, "Property file")->required();
  verify->add_option("--network", vo.networks, "Override a network path (NAME=PATH)");
  verify->add_option("--timeout", vo.timeout, "Wall-clock limit in seconds")->check(CLI::PositiveNumber);
  verify->add_option("--backend", vo.backend, "builtin or smt2")->check(CLI::IsMember({"builtin", "smt2"}));
  verify->add_option("--threads", vo.threads, "Worker threads")->check(CLI::Range(1, 1024));
  verify->add_option("--seed", vo.seed, "Seed (echoed in the report)");
  verify->add_option("--max-splits", vo.max_splits, "Give up after this many relu splits (0: no limit)");
  verify->add_option("--out", vo.out, "Write the report here instead of standard output");
  verify->add_option("--smt-solver", vo.smt_solver, "External solver executable for --backend smt2");
  verify->add_flag("--timing", vo.timing, "Include wall-clock time in the report");

  TemplateOpts to;
  auto* tmpl = app.add_subcommand("template", "Instantiate a property template");
  tmpl->add_option("kind", to.kind, "p1, p2, p2prime, p3, robustness or fairness")->required();
  tmpl->add_option("--nuv", to.nuv, "Network under verification")->required();
  tmpl->add_option("--spec", to.spec, "Specification network");
  tmpl->add_option("--class", to.cls, "Class c");
  tmpl->add_option("--epsilon", to.epsilon, "Distance bound");
  tmpl->add_option("--delta", to.delta, "Confidence bound");
  tmpl->add_option("--point", to.point, "Robustness centre, comma separated");
  tmpl->add_option("--sensitive", to.sensitive, "Sensitive input feature (0-based)");
  tmpl->add_option("--input-dim", to.input_dim, "Input dimension (default: read from --nuv)");
  tmpl->add_option("--output-dim", to.output_dim, "Output dimension (default: read from --nuv)");
  tmpl->add_flag("--no-box", to.no_box, "Leave the input unconstrained (pre = true)");
  tmpl->add_option("--box-lo", to.box_lo, "Lower end of the input box");
  tmpl->add_option("--box-hi", to.box_hi, "Upper end of the input box");
  tmpl->add_option("--out", to.out, "Write the spec here instead of standard output");

  std::string eval_net, eval_input, eval_file;
  auto* ev = app.add_subcommand("eval", "Evaluate a network exactly");
  ev->add_option("network", eval_net, "Network file")->required();
  ev->add_option("input", eval_input, "Comma separated input");
  ev->add_option("--input-file", eval_file, "Read the input from a file");

  std::string ex_spec, ex_out;
  std::vector<std::string> ex_nets;
  auto* ex = app.add_subcommand("export", "Write the verification condition as SMT-LIB 2");
  ex->add_option("spec", ex_spec, "Property file")->required();
  ex->add_option("out", ex_out, "Output .smt2 file")->required();
  ex->add_option("--network", ex_nets, "Override a network path (NAME=PATH)");

  std::string cc_spec, cc_report;
  std::vector<std::string> cc_nets;
  auto* cc = app.add_subcommand("check-cex", "Replay a report's counterexample");
  cc->add_option("spec", cc_spec, "Property file")->required();
  cc->add_option("report", cc_report, "Report file")->required();
  cc->add_option("--network", cc_nets, "Override a network path (NAME=PATH)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 3;
  }

  try {
    if (*verify) return cmd_verify(vo, out);
    if (*tmpl) return cmd_template(to, out);
    if (*ev) return cmd_eval(eval_net, eval_input, eval_file, out);
    if (*ex) return cmd_export(ex_spec, ex_out, ex_nets, out);
    if (*cc) return cmd_check_cex(cc_spec, cc_report, cc_nets, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}

}  // namespace nesal
