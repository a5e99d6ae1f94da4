#include <doctest.h>

#include "generators.hpp"
#include "nesal/network.hpp"

using namespace nesal;

namespace {

const char* kIdentity = R"({"name": "id", "input_dim": 1, "layers": [{"activation": "linear", "weights": [[1]], "bias": [0]}]})";

const char* kSmallRelu = R"({
  "name": "small", "input_dim": 2,
  "layers": [
    {"activation": "relu", "weights": [[1, -1], [2, 0]], "bias": [0, -1]},
    {"activation": "linear", "weights": [[1, 1]], "bias": ["1/2"]}
  ]})";

Vector vec(std::initializer_list<Rational> xs) { return Vector(xs); }

NetworkError::Kind error_kind(const std::string& text) {
  try {
    load_network(text);
  } catch (const NetworkError& e) {
    return e.kind();
  }
  FAIL("expected a NetworkError");
  return NetworkError::Kind::Parse;
}

}  // namespace

TEST_CASE("load identity network") {
  const Network n = load_network(kIdentity);
  CHECK(n.input_dim == 1);
  CHECK(n.output_dim() == 1);
  CHECK(n.name == "id");
  CHECK(evaluate(n, vec({Rational(7, 2)})).output == vec({Rational(7, 2)}));
}

TEST_CASE("decimal weights are exact") {
  const Network n = load_network(
      R"({"name": "d", "input_dim": 1, "layers": [{"activation": "linear", "weights": [[0.1]], "bias": ["0.05"]}]})");
  CHECK(n.layers[0].weights[0][0] == Rational(1, 10));
  CHECK(n.layers[0].bias[0] == Rational(1, 20));
}

TEST_CASE("load errors") {
  CHECK(error_kind("{not json") == NetworkError::Kind::Parse);
  CHECK(error_kind(R"({"name": "s", "input_dim": 1, "layers": [{"weights": [[1], [1], [1]], "bias": [0, 0]}]})") ==
        NetworkError::Kind::Shape);
  CHECK(error_kind(R"({"name": "s", "input_dim": 1, "layers": [{"activation": "tanh", "weights": [[1]], "bias": [0]}]})") ==
        NetworkError::Kind::Activation);
  CHECK(error_kind(R"({"name": "s", "input_dim": 1, "layers": []})") == NetworkError::Kind::Shape);
}

TEST_CASE("activation defaults to linear") {
  const Network n = load_network(R"({"name": "l", "input_dim": 1, "layers": [{"weights": [[-1]], "bias": [0]}]})");
  CHECK(n.layers[0].activation == Activation::Linear);
  CHECK(evaluate(n, vec({Rational(3)})).output == vec({Rational(-3)}));
}

TEST_CASE("evaluate examples") {
  SUBCASE("relu clamps negatives") {
    const Network n = load_network(R"({"name": "r", "input_dim": 1, "layers": [
      {"activation": "relu", "weights": [[1]], "bias": [0]},
      {"activation": "linear", "weights": [[1]], "bias": [0]}]})");
    CHECK(evaluate(n, vec({Rational(-2)})).output == vec({Rational(0)}));
  }
  SUBCASE("hand-computed forward pass") {
    const Network n = load_network(kSmallRelu);
    const EvalResult r = evaluate(n, vec({Rational(1), Rational(2)}));
    CHECK(r.trace.pre[0] == vec({Rational(-1), Rational(1)}));
    CHECK(r.trace.post[0] == vec({Rational(0), Rational(1)}));
    CHECK(r.output == vec({Rational(3, 2)}));
  }
  SUBCASE("dimension mismatch") {
    const Network n = load_network(kSmallRelu);
    CHECK_THROWS_AS(evaluate(n, vec({Rational(1)})), NetworkError);
  }
}

TEST_CASE("validate names the offending layer") {
  Network n = load_network(kSmallRelu);
  CHECK(validation_errors(n).empty());
  n.layers[1].weights[0].push_back(Rational(1));
  const auto errs = validation_errors(n);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("layer 1") != std::string::npos);
  CHECK_THROWS_AS(validate(n), NetworkError);

  Network empty;
  empty.name = "e";
  empty.input_dim = 2;
  const auto e2 = validation_errors(empty);
  REQUIRE(!e2.empty());
  CHECK(e2[0] == "empty layer list");
}

TEST_CASE("trace recomputes neuron by neuron; evaluate is pure") {
  testing::Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const Network n = testing::random_network(rng, {3, {4, 2}, 2}, "r");
    const Vector x = testing::random_vector(rng, 3, Rational(-2), Rational(2));
    const EvalResult r = evaluate(n, x);
    Vector prev = x;
    for (std::size_t l = 0; l < n.layers.size(); ++l) {
      const Layer& layer = n.layers[l];
      for (std::size_t i = 0; i < layer.rows(); ++i) {
        Rational s = layer.bias[i];
        for (std::size_t j = 0; j < prev.size(); ++j) s += layer.weights[i][j] * prev[j];
        CHECK(r.trace.pre[l][i] == s);
        CHECK(r.trace.post[l][i] == (layer.activation == Activation::ReLU ? max(Rational(), s) : s));
      }
      prev = r.trace.post[l];
    }
    CHECK(r.output == prev);
    const EvalResult again = evaluate(n, x);
    CHECK(again.output == r.output);
    CHECK(again.trace.pre == r.trace.pre);
  }
}

TEST_CASE("render and load round-trip") {
  testing::Rng rng(12);
  for (int k = 0; k < 10; ++k) {
    const Network n = testing::random_network(rng, {2, {3}, 2}, "rt", 9, 7);
    const Network back = load_network(render_network(n));
    CHECK(back == n);
    for (int i = 0; i < 10; ++i) {
      const Vector x = testing::random_vector(rng, 2, Rational(-5), Rational(5), 3);
      CHECK(evaluate(back, x).output == evaluate(n, x).output);
    }
  }
}

TEST_CASE("graph view") {
  const GraphView g = graph_of(load_network(kSmallRelu));
  CHECK(g.vertex_count == 5);
  CHECK(g.inputs == std::vector<std::size_t>{0, 1});
  CHECK(g.outputs == std::vector<std::size_t>{4});
  CHECK(g.edges.size() == 5);  // the zero weight gives no edge
  CHECK(g.activation == std::vector<Activation>{Activation::ReLU, Activation::ReLU, Activation::Linear});
  for (const auto& e : g.edges) CHECK(e.from < e.to);  // layered, hence acyclic
}
