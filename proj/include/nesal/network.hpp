#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nesal/rational.hpp"

namespace nesal {

class NetworkError : public std::runtime_error {
 public:
  enum class Kind { Parse, Shape, Activation, Dimension };
  NetworkError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class Activation { ReLU, Linear };

std::string_view to_string(Activation a);

using Vector = std::vector<Rational>;
using Matrix = std::vector<Vector>;

/// One fully connected layer. weights[i][j] is the weight from input j into
/// neuron i of this layer.
struct Layer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::Linear;

  std::size_t rows() const { return weights.size(); }
  std::size_t cols() const { return weights.empty() ? 0 : weights.front().size(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Network {
  std::string name;
  std::size_t input_dim = 0;
  std::vector<Layer> layers;

  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().rows(); }
  std::size_t neuron_count() const;
  std::size_t relu_count() const;

  friend bool operator==(const Network&, const Network&) = default;
};

/// Per-neuron values of one forward pass, indexed [layer][neuron].
struct EvalTrace {
  std::vector<Vector> pre;
  std::vector<Vector> post;
};

struct EvalResult {
  Vector output;
  EvalTrace trace;
};

/// Every violated invariant, each message naming the offending layer.
std::vector<std::string> validation_errors(const Network& net);

/// Throws NetworkError(Shape) listing all violations.
void validate(const Network& net);

/// Parses the JSON network format. All numerals are converted exactly.
Network load_network(std::string_view text);
Network load_network_file(const std::string& path);

/// Serializes to the JSON network format with rationals as "p/q" strings.
std::string render_network(const Network& net);

EvalResult evaluate(const Network& net, std::span<const Rational> input);

// Graph view of a layered network: vertex 0..input_dim-1 are inputs, then
// every layer's neurons in order.
struct GraphEdge {
  std::size_t from;
  Rational weight;
  std::size_t to;
};

struct GraphView {
  std::size_t vertex_count = 0;
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;
  std::vector<GraphEdge> edges;
  // activation of every non-input vertex, indexed by vertex - inputs.size()
  std::vector<Activation> activation;
  std::vector<Rational> bias;
};

GraphView graph_of(const Network& net);

}  // namespace nesal
