#pragma once

// JSON parsing that never routes numbers through binary floating point:
// every non-integer numeral is kept as its source lexeme (a JSON string).

#include <json.hpp>

#include <string>
#include <string_view>

#include "nesal/rational.hpp"

namespace nesal::detail {

class ExactSax {
 public:
  using json = nlohmann::json;
  explicit ExactSax(json& root) : dom_(root, true) {}

  bool null() { return dom_.null(); }
  bool boolean(bool v) { return dom_.boolean(v); }
  bool number_integer(json::number_integer_t v) { return dom_.number_integer(v); }
  bool number_unsigned(json::number_unsigned_t v) { return dom_.number_unsigned(v); }
  bool number_float(json::number_float_t, const json::string_t& lexeme) {
    json::string_t copy = lexeme;
    return dom_.string(copy);
  }
  bool string(json::string_t& v) { return dom_.string(v); }
  bool binary(json::binary_t& v) { return dom_.binary(v); }
  bool start_object(std::size_t n) { return dom_.start_object(n); }
  bool key(json::string_t& k) { return dom_.key(k); }
  bool end_object() { return dom_.end_object(); }
  bool start_array(std::size_t n) { return dom_.start_array(n); }
  bool end_array() { return dom_.end_array(); }
  bool parse_error(std::size_t pos, const std::string& tok, const nlohmann::detail::exception& ex) {
    return dom_.parse_error(pos, tok, ex);
  }

 private:
  nlohmann::detail::json_sax_dom_parser<json> dom_;
};

inline nlohmann::json parse_exact_json(std::string_view text) {
  nlohmann::json root;
  ExactSax sax(root);
  nlohmann::json::sax_parse(text.begin(), text.end(), &sax);
  return root;
}

/// Accepts JSON integers, float lexemes (stored as strings by ExactSax),
/// and "p/q" / decimal strings.
inline Rational rational_from_json(const nlohmann::json& v) {
  if (v.is_number_integer()) {
    if (v.is_number_unsigned()) return Rational::parse(std::to_string(v.get<unsigned long long>()));
    return Rational(static_cast<long long>(v.get<long long>()));
  }
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  throw NumberFormatError("expected a number or numeric string, got " + v.dump());
}

}  // namespace nesal::detail
