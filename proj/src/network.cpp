#include "nesal/network.hpp"

#include <fstream>
#include <sstream>

#include "exact_json.hpp"

namespace nesal {

std::string_view to_string(Activation a) {
  return a == Activation::ReLU ? "relu" : "linear";
}

std::size_t Network::neuron_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.rows();
  return n;
}

std::size_t Network::relu_count() const {
  std::size_t n = 0;
  for (const auto& l : layers)
    if (l.activation == Activation::ReLU) n += l.rows();
  return n;
}

std::vector<std::string> validation_errors(const Network& net) {
  std::vector<std::string> errors;
  if (net.input_dim == 0) errors.emplace_back("input_dim must be positive");
  if (net.layers.empty()) {
    errors.emplace_back("empty layer list");
    return errors;
  }
  std::size_t expected_cols = net.input_dim;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& layer = net.layers[k];
    const std::string where = "layer " + std::to_string(k) + ": ";
    if (layer.weights.empty()) {
      errors.push_back(where + "no neurons");
      continue;
    }
    const std::size_t cols = layer.weights.front().size();
    for (std::size_t i = 1; i < layer.weights.size(); ++i) {
      if (layer.weights[i].size() != cols) {
        errors.push_back(where + "weight row " + std::to_string(i) + " has " +
                         std::to_string(layer.weights[i].size()) + " entries, expected " +
                         std::to_string(cols));
        break;
      }
    }
    if (layer.bias.size() != layer.weights.size())
      errors.push_back(where + "bias length " + std::to_string(layer.bias.size()) +
                       " does not match " + std::to_string(layer.weights.size()) + " weight rows");
    if (cols != expected_cols)
      errors.push_back(where + "expects " + std::to_string(cols) + " inputs but previous layer provides " +
                       std::to_string(expected_cols));
    expected_cols = layer.weights.size();
  }
  return errors;
}

void validate(const Network& net) {
  auto errors = validation_errors(net);
  if (errors.empty()) return;
  std::string msg = "invalid network";
  if (!net.name.empty()) msg += " '" + net.name + "'";
  for (const auto& e : errors) msg += "\n  " + e;
  throw NetworkError(NetworkError::Kind::Shape, msg);
}

namespace {

Vector parse_vector(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw NetworkError(NetworkError::Kind::Parse, what + " must be an array");
  Vector out;
  out.reserve(j.size());
  for (const auto& v : j) {
    try {
      out.push_back(detail::rational_from_json(v));
    } catch (const NumberFormatError& e) {
      throw NetworkError(NetworkError::Kind::Parse, what + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

Network load_network(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = detail::parse_exact_json(text);
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(NetworkError::Kind::Parse, std::string("malformed network file: ") + e.what());
  }
  if (!doc.is_object()) throw NetworkError(NetworkError::Kind::Parse, "network file must be an object");

  Network net;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw NetworkError(NetworkError::Kind::Parse, "'name' must be a string");
    net.name = it->get<std::string>();
  }
  auto dim = doc.find("input_dim");
  if (dim == doc.end() || !dim->is_number_integer() || dim->get<long long>() <= 0)
    throw NetworkError(NetworkError::Kind::Parse, "'input_dim' must be a positive integer");
  net.input_dim = dim->get<std::size_t>();

  auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array())
    throw NetworkError(NetworkError::Kind::Parse, "'layers' must be an array");

  for (std::size_t k = 0; k < layers->size(); ++k) {
    const auto& lj = (*layers)[k];
    const std::string where = "layer " + std::to_string(k);
    if (!lj.is_object()) throw NetworkError(NetworkError::Kind::Parse, where + " must be an object");
    Layer layer;
    auto act = lj.find("activation");
    if (act == lj.end()) {
      layer.activation = Activation::Linear;
    } else {
      const std::string name = act->is_string() ? act->get<std::string>() : act->dump();
      if (name == "relu") {
        layer.activation = Activation::ReLU;
      } else if (name == "linear") {
        layer.activation = Activation::Linear;
      } else {
        throw NetworkError(NetworkError::Kind::Activation, where + ": unknown activation '" + name + "'");
      }
    }
    auto w = lj.find("weights");
    if (w == lj.end() || !w->is_array())
      throw NetworkError(NetworkError::Kind::Parse, where + ": 'weights' must be an array of rows");
    for (std::size_t i = 0; i < w->size(); ++i)
      layer.weights.push_back(parse_vector((*w)[i], where + " weights row " + std::to_string(i)));
    auto b = lj.find("bias");
    if (b == lj.end()) throw NetworkError(NetworkError::Kind::Parse, where + ": missing 'bias'");
    layer.bias = parse_vector(*b, where + " bias");
    net.layers.push_back(std::move(layer));
  }
  validate(net);
  return net;
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NetworkError(NetworkError::Kind::Parse, "cannot open network file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_network(ss.str());
}

std::string render_network(const Network& net) {
  nlohmann::ordered_json doc;
  doc["name"] = net.name;
  doc["input_dim"] = net.input_dim;
  doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : net.layers) {
    nlohmann::ordered_json lj;
    lj["activation"] = std::string(to_string(layer.activation));
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : layer.weights) {
      auto r = nlohmann::ordered_json::array();
      for (const auto& w : row) r.push_back(w.str());
      rows.push_back(std::move(r));
    }
    lj["weights"] = std::move(rows);
    auto bias = nlohmann::ordered_json::array();
    for (const auto& v : layer.bias) bias.push_back(v.str());
    lj["bias"] = std::move(bias);
    doc["layers"].push_back(std::move(lj));
  }
  return doc.dump(1) + "\n";
}

EvalResult evaluate(const Network& net, std::span<const Rational> input) {
  if (input.size() != net.input_dim)
    throw NetworkError(NetworkError::Kind::Dimension,
                       "network '" + net.name + "' expects " + std::to_string(net.input_dim) +
                           " inputs, got " + std::to_string(input.size()));
  EvalResult result;
  result.trace.pre.reserve(net.layers.size());
  result.trace.post.reserve(net.layers.size());
  Vector current(input.begin(), input.end());
  for (const auto& layer : net.layers) {
    Vector pre(layer.rows());
    Vector post(layer.rows());
    for (std::size_t i = 0; i < layer.rows(); ++i) {
      Rational acc = layer.bias[i];
      const auto& row = layer.weights[i];
      for (std::size_t j = 0; j < row.size(); ++j)
        if (!row[j].is_zero()) acc += row[j] * current[j];
      post[i] = (layer.activation == Activation::ReLU && acc.sign() < 0) ? Rational() : acc;
      pre[i] = std::move(acc);
    }
    result.trace.pre.push_back(std::move(pre));
    current = post;
    result.trace.post.push_back(std::move(post));
  }
  result.output = std::move(current);
  return result;
}

GraphView graph_of(const Network& net) {
  GraphView g;
  std::size_t prev_begin = 0;
  std::size_t prev_size = net.input_dim;
  for (std::size_t i = 0; i < net.input_dim; ++i) g.inputs.push_back(i);
  std::size_t next = net.input_dim;
  for (const auto& layer : net.layers) {
    const std::size_t begin = next;
    for (std::size_t i = 0; i < layer.rows(); ++i) {
      for (std::size_t j = 0; j < prev_size; ++j)
        if (!layer.weights[i][j].is_zero()) g.edges.push_back({prev_begin + j, layer.weights[i][j], begin + i});
      g.activation.push_back(layer.activation);
      g.bias.push_back(layer.bias[i]);
    }
    next += layer.rows();
    prev_begin = begin;
    prev_size = layer.rows();
  }
  g.vertex_count = next;
  for (std::size_t i = 0; i < prev_size; ++i) g.outputs.push_back(prev_begin + i);
  return g;
}

}  // namespace nesal
