#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nesal/property.hpp"
#include "nesal/solver.hpp"
#include "nesal/vc.hpp"

namespace nesal {

inline constexpr const char* kToolName = "nesal";
inline constexpr const char* kToolVersion = "0.1.0";

/// A property file read, bound against its networks and compiled.
struct LoadedSpec {
  Property property;  // bound
  NetworkMap networks;
  VC vc;
};

/// Reads `spec_path`, loads its networks (paths relative to the spec's
/// directory unless overridden), binds and compiles.
LoadedSpec load_spec(const std::string& spec_path, const std::map<std::string, std::string>& overrides = {});

struct ReportConfig {
  std::string spec;
  std::string backend = "builtin";
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  double timeout_seconds = 1800;
  bool timing = false;
};

/// JSON report; rationals are written as "p/q" strings. Without `timing` the
/// output depends only on the inputs, so single-threaded runs are
/// byte-identical.
std::string render_report(const SolverResult& result, const VC& vc, const Property& prop, const ReportConfig& config);

struct ReplayOutcome {
  int exit_code = 0;  // 0 replay ok, 1 mismatch, 3 nothing to check
  std::string message;
};

/// Replays a report's counterexample through the networks: outputs must be
/// reproduced exactly, pre must hold and post must fail.
ReplayOutcome replay_report(const LoadedSpec& spec, const std::string& report_text);

/// Command-line entry point. `args` excludes the program name. Returns the
/// process exit code: 0 verified/ok, 1 falsified/mismatch, 2 unknown, 3 error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nesal
