#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nesal/formula.hpp"
#include "nesal/network.hpp"

namespace nesal {

/// Errors raised while reading or binding a property. Syntax errors carry a
/// 1-based source position.
class PropertyError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Bind, Dimension };
  PropertyError(Kind kind, const std::string& what, std::size_t line = 0, std::size_t column = 0);
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
};

enum class NetRole { Nuv, Spec };

struct NetDecl {
  std::string name;
  std::string path;
  NetRole role = NetRole::Nuv;
  friend bool operator==(const NetDecl&, const NetDecl&) = default;
};

/// output := network(input)
struct Assignment {
  std::string output;
  std::string network;
  std::string input;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

enum class VarRole { NetInput, NetOutput };

struct VectorVar {
  std::string name;
  std::size_t dim = 0;  // 0 until bound
  VarRole role = VarRole::NetInput;
  friend bool operator==(const VectorVar&, const VectorVar&) = default;
};

/// A triple {pre} assigns {post}.
struct Property {
  std::vector<NetDecl> networks;
  Formula pre;
  std::vector<Assignment> assigns;
  Formula post;
  std::map<std::string, VectorVar> vectors;

  const NetDecl* find_network(std::string_view name) const;
  bool is_bound() const;
  DimMap dims() const;

  friend bool operator==(const Property&, const Property&) = default;
};

using NetworkMap = std::map<std::string, Network>;

/// Parses a property file. Name resolution happens here: undeclared
/// vectors, pre-conditions over outputs and duplicate names are rejected.
Property parse_property(std::string_view text);

std::string render_property(const Property& prop);

/// Annotates every vector with its dimension and checks all shapes against
/// the loaded networks. Idempotent.
Property bind(const Property& prop, const NetworkMap& nets);

/// Loads every declared network. Paths are resolved relative to `base_dir`
/// unless `overrides` supplies one for that name.
NetworkMap load_declared_networks(const Property& prop, const std::string& base_dir,
                                  const std::map<std::string, std::string>& overrides = {});

}  // namespace nesal
