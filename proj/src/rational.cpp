#include "nesal/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace nesal {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

}  // namespace

Rational::Rational(long num, long den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  value_ = mpq_class(num, den);
  value_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw std::domain_error("division by zero");
  value_ /= o.value_;
  return *this;
}

Rational Rational::parse(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw NumberFormatError("malformed number '" + std::string(text) + "'");
  };
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return fail();

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  mpq_class q;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return fail();
    mpz_class d(std::string(den), 10);
    if (d == 0) throw NumberFormatError("zero denominator in '" + std::string(text) + "'");
    q = mpq_class(mpz_class(std::string(num), 10), d);
  } else {
    std::string_view mantissa = s;
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = s.substr(0, e);
      std::string_view exp_text = s.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (!all_digits(exp_text) || exp_text.size() > 6) return fail();
      exponent = std::strtol(std::string(exp_text).c_str(), nullptr, 10);
      if (exp_negative) exponent = -exponent;
    }
    std::string digits;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
      auto int_part = mantissa.substr(0, dot);
      auto frac_part = mantissa.substr(dot + 1);
      if (int_part.empty() && frac_part.empty()) return fail();
      if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)))
        return fail();
      digits = std::string(int_part) + std::string(frac_part);
      exponent -= static_cast<long>(frac_part.size());
    } else {
      if (!all_digits(mantissa)) return fail();
      digits = std::string(mantissa);
    }
    mpz_class n(digits, 10);
    if (exponent >= 0) {
      q = mpq_class(n * pow10(static_cast<unsigned long>(exponent)));
    } else {
      q = mpq_class(n, pow10(static_cast<unsigned long>(-exponent)));
    }
  }
  q.canonicalize();
  if (negative) q = -q;
  return Rational(q);
}

std::size_t Rational::hash() const {
  return std::hash<std::string>{}(str());
}

std::string DeltaRational::str() const {
  if (delta.is_zero()) return real.str();
  return real.str() + (delta.sign() > 0 ? "+" : "-") + delta.abs().str() + "d";
}

}  // namespace nesal
