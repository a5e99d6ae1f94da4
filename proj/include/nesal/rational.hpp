#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nesal {

class NumberFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact arbitrary-precision rational. Always canonical: lowest terms,
/// positive denominator.
class Rational {
 public:
  Rational() = default;
  Rational(int v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(long long v) : value_(std::to_string(v)) {}  // NOLINT
  Rational(unsigned long v) : value_(v) {}  // NOLINT
  Rational(long num, long den);
  explicit Rational(mpq_class v) : value_(std::move(v)) { value_.canonicalize(); }

  /// Parses "12", "-3", "0.05", "1.5e-3", "p/q". Decimals are converted
  /// exactly (no binary floating point involved).
  static Rational parse(std::string_view text);

  /// "p" for integers, "p/q" otherwise.
  std::string str() const { return value_.get_str(); }

  const mpq_class& raw() const { return value_; }
  mpz_class numerator() const { return value_.get_num(); }
  mpz_class denominator() const { return value_.get_den(); }

  int sign() const { return sgn(value_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return value_.get_den() == 1; }
  double to_double() const { return value_.get_d(); }

  Rational abs() const { return Rational(::abs(value_)); }

  Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
  Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
  Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  Rational operator-() const { return Rational(mpq_class(-value_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

  std::size_t hash() const;

 private:
  mpq_class value_;
};

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// A rational extended with a symbolic infinitesimal: real + delta * k.
/// Ordered lexicographically; used to represent strict bounds in simplex.
struct DeltaRational {
  Rational real;
  Rational delta;

  DeltaRational() = default;
  DeltaRational(Rational r, Rational d = Rational()) : real(std::move(r)), delta(std::move(d)) {}  // NOLINT

  DeltaRational& operator+=(const DeltaRational& o) { real += o.real; delta += o.delta; return *this; }
  DeltaRational& operator-=(const DeltaRational& o) { real -= o.real; delta -= o.delta; return *this; }
  friend DeltaRational operator+(DeltaRational a, const DeltaRational& b) { return a += b; }
  friend DeltaRational operator-(DeltaRational a, const DeltaRational& b) { return a -= b; }
  friend DeltaRational operator*(const Rational& s, const DeltaRational& d) { return {s * d.real, s * d.delta}; }
  friend DeltaRational operator/(const DeltaRational& d, const Rational& s) { return {d.real / s, d.delta / s}; }

  friend bool operator==(const DeltaRational&, const DeltaRational&) = default;
  friend std::strong_ordering operator<=>(const DeltaRational& a, const DeltaRational& b) {
    if (auto c = a.real <=> b.real; c != 0) return c;
    return a.delta <=> b.delta;
  }

  /// Value with the infinitesimal instantiated.
  Rational concretize(const Rational& delta_value) const { return real + delta * delta_value; }

  std::string str() const;
};

}  // namespace nesal

template <>
struct std::hash<nesal::Rational> {
  std::size_t operator()(const nesal::Rational& r) const { return r.hash(); }
};
