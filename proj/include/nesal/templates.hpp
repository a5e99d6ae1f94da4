#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nesal/rational.hpp"

namespace nesal {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TemplateKind { P1, P2, P2Prime, P3, Robustness, Fairness };

/// Accepts "p1", "p2", "p2prime", "p3", "robustness", "fairness".
TemplateKind parse_template_kind(const std::string& name);

struct TemplateParams {
  TemplateKind kind = TemplateKind::P3;
  std::string nuv;   // path written into the spec
  std::string spec;  // specification network (p1: detector, p2: autoencoder, p3: second network)
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;  // NUV output dimension
  std::optional<std::size_t> cls;
  std::optional<Rational> epsilon;
  std::optional<Rational> delta;
  std::vector<Rational> point;           // robustness centre
  std::optional<std::size_t> sensitive;  // fairness: 0-based feature index
  // Input box emitted into the pre-condition; nullopt leaves pre = true.
  std::optional<std::pair<Rational, Rational>> box = std::make_pair(Rational(0), Rational(1));
};

/// Renders a property file for the template. P2's confidence conf > delta is
/// expanded to n*y1[c] - sum_{j != c} y1[j] > n*delta.
std::string render_template(const TemplateParams& params);

}  // namespace nesal
