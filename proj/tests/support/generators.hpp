#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nesal/network.hpp"
#include "nesal/property.hpp"
#include "nesal/solver.hpp"
#include "nesal/vc.hpp"

namespace nesal::testing {

using Rng = std::mt19937_64;

/// Uniform p/q with |p| <= max_num and 1 <= q <= max_den.
Rational random_rational(Rng& rng, int max_num = 4, int max_den = 4);

/// Uniform on a grid of step 1/den inside [lo, hi].
Rational random_in(Rng& rng, const Rational& lo, const Rational& hi, int den = 8);

Vector random_vector(Rng& rng, std::size_t dim, const Rational& lo, const Rational& hi, int den = 8);

struct NetShape {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;  // relu layers
  std::size_t output_dim = 1;       // linear output layer
};

Network random_network(Rng& rng, const NetShape& shape, const std::string& name, int max_num = 4, int max_den = 4);

/// A property file together with its in-memory networks, bound and compiled.
struct Instance {
  std::string name;
  NetworkMap networks;
  std::string spec_text;  // declares each network as "<name>.json"
  Property property;
  VC vc;
};

Instance make_instance(const std::string& name, const std::string& spec_text, NetworkMap networks);

/// Random property over one or two small networks with at most `max_relus`
/// relus in total: single network, two networks sharing an input (P3
/// shape), or one network applied twice (robustness/fairness shape).
Instance random_instance(Rng& rng, std::size_t max_relus, const std::string& name);

/// P2-shaped instance: NUV 196 -> 10 -> 10, autoencoder 196 -> 10 -> 196,
/// eps = 1/10, delta = 2, inputs in [0,1], c = class predicted at x = 1/2.
Instance p2_instance(std::uint64_t seed, std::size_t input_dim = 196, std::size_t hidden = 10);

/// Writes the networks and "spec.nesal" into `dir`; returns the spec path.
std::filesystem::path write_instance(const Instance& inst, const std::filesystem::path& dir);

/// Model of the VC's network constraints built from forward traces; inputs
/// are looked up by the name of each assignment's input vector.
Model trace_model(const VC& vc, const NetworkMap& nets, const Env& inputs);

/// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace nesal::testing
