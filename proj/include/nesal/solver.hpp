#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nesal/network.hpp"
#include "nesal/rational.hpp"
#include "nesal/vc.hpp"

namespace nesal {

struct SolverConfig {
  double timeout_seconds = 1800;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::uint64_t max_splits = 0;  // 0: unlimited
};

struct SolverStats {
  std::uint64_t splits = 0;
  std::uint64_t decisions = 0;
  std::uint64_t pivots = 0;
  std::uint64_t propagations = 0;
  std::uint64_t elapsed_ms = 0;
};

enum class Verdict { Verified, Falsified, Unknown };

std::string_view to_string(Verdict v);

/// Total assignment of the VC's variables.
using Model = std::vector<Rational>;

struct SolverResult {
  Verdict verdict = Verdict::Unknown;
  std::optional<Model> model;  // present iff Falsified
  SolverStats stats;
  std::string unknown_reason;  // "timeout", "resource limit"
};

/// Decides the negated verification condition: Verified when it is
/// unsatisfiable, Falsified with a model otherwise. Single-threaded search is
/// deterministic.
SolverResult solve(const VC& vc, const SolverConfig& config = {});

/// Checks an exact model against every hard constraint, relu and the
/// skeleton. Returns an empty string on success, otherwise a description of
/// the first violation.
std::string check_model(const VC& vc, const Model& model);

struct CexRecord {
  std::string output;
  std::string network;
  std::string input;
  Vector input_values;
  Vector output_values;
};

/// One record per assignment, in property order.
std::vector<CexRecord> extract_counterexample(const Model& model, const VC& vc);

}  // namespace nesal
