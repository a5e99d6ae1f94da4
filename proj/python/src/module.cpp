#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nesal/cli.hpp"
#include "nesal/network.hpp"
#include "nesal/smtlib.hpp"
#include "nesal/solver.hpp"
#include "nesal/templates.hpp"

namespace py = pybind11;
using namespace nesal;

namespace {

// Rationals cross the boundary as "p/q" strings; the Python side turns them
// into fractions.Fraction.
std::vector<std::string> to_strings(const Vector& v) {
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& r : v) out.push_back(r.str());
  return out;
}

Vector from_strings(const std::vector<std::string>& v) {
  Vector out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(Rational::parse(s));
  return out;
}

std::string verify(const std::string& spec_path, const std::map<std::string, std::string>& networks, double timeout,
                   std::size_t threads, std::uint64_t seed, std::uint64_t max_splits) {
  const LoadedSpec spec = load_spec(spec_path, networks);
  SolverConfig cfg;
  cfg.timeout_seconds = timeout;
  cfg.threads = threads;
  cfg.seed = seed;
  cfg.max_splits = max_splits;
  SolverResult result;
  {
    py::gil_scoped_release release;
    result = solve(spec.vc, cfg);
  }
  ReportConfig rc;
  rc.spec = spec_path;
  rc.threads = threads;
  rc.seed = seed;
  rc.timeout_seconds = timeout;
  return render_report(result, spec.vc, spec.property, rc);
}

}  // namespace

PYBIND11_MODULE(_nesal, m) {
  m.doc() = "Exact verifier for neuro-symbolic properties of ReLU networks";
  m.attr("__version__") = kToolVersion;

  py::register_exception<NetworkError>(m, "NetworkError", PyExc_ValueError);
  py::register_exception<PropertyError>(m, "PropertyError", PyExc_ValueError);
  py::register_exception<TemplateError>(m, "TemplateError", PyExc_ValueError);
  py::register_exception<SmtError>(m, "SmtError", PyExc_ValueError);

  m.def(
      "evaluate",
      [](const std::string& network_text, const std::vector<std::string>& input) {
        const Network net = load_network(network_text);
        return to_strings(evaluate(net, from_strings(input)).output);
      },
      py::arg("network_text"), py::arg("input"), "Exact forward pass; values are p/q strings.");

  m.def(
      "network_info",
      [](const std::string& network_text) {
        const Network net = load_network(network_text);
        py::dict d;
        d["name"] = net.name;
        d["input_dim"] = net.input_dim;
        d["output_dim"] = net.output_dim();
        d["neurons"] = net.neuron_count();
        d["relus"] = net.relu_count();
        return d;
      },
      py::arg("network_text"));

  m.def("verify", &verify, py::arg("spec_path"), py::arg("networks") = std::map<std::string, std::string>{},
        py::arg("timeout") = 1800.0, py::arg("threads") = 1, py::arg("seed") = 0, py::arg("max_splits") = 0,
        "Runs the built-in solver; returns the JSON report.");

  m.def(
      "export_smt2",
      [](const std::string& spec_path, const std::map<std::string, std::string>& networks) {
        return export_smt2(load_spec(spec_path, networks).vc);
      },
      py::arg("spec_path"), py::arg("networks") = std::map<std::string, std::string>{});

  m.def(
      "check_cex",
      [](const std::string& spec_path, const std::string& report_text,
         const std::map<std::string, std::string>& networks) {
        const ReplayOutcome r = replay_report(load_spec(spec_path, networks), report_text);
        return py::make_tuple(r.exit_code, r.message);
      },
      py::arg("spec_path"), py::arg("report_text"), py::arg("networks") = std::map<std::string, std::string>{},
      "Replays a report: (0, msg) ok, (1, msg) mismatch, (3, msg) nothing to check.");

  m.def(
      "render_template",
      [](const std::string& kind, const std::string& nuv, const std::string& spec, std::size_t input_dim,
         std::size_t output_dim, std::optional<std::size_t> cls, std::optional<std::string> epsilon,
         std::optional<std::string> delta, std::vector<std::string> point, std::optional<std::size_t> sensitive,
         std::optional<std::pair<std::string, std::string>> box) {
        TemplateParams p;
        p.kind = parse_template_kind(kind);
        p.nuv = nuv;
        p.spec = spec;
        p.input_dim = input_dim;
        p.output_dim = output_dim;
        p.cls = cls;
        if (epsilon) p.epsilon = Rational::parse(*epsilon);
        if (delta) p.delta = Rational::parse(*delta);
        p.point = from_strings(point);
        p.sensitive = sensitive;
        if (box)
          p.box = std::make_pair(Rational::parse(box->first), Rational::parse(box->second));
        else
          p.box.reset();
        return render_template(p);
      },
      py::arg("kind"), py::arg("nuv"), py::arg("spec") = "", py::arg("input_dim"), py::arg("output_dim"),
      py::arg("cls") = py::none(), py::arg("epsilon") = py::none(), py::arg("delta") = py::none(),
      py::arg("point") = std::vector<std::string>{}, py::arg("sensitive") = py::none(),
      py::arg("box") = std::make_pair(std::string("0"), std::string("1")));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process: (exit code, stdout, stderr).");
}
