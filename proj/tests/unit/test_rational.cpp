#include <doctest.h>

#include <random>

#include "nesal/rational.hpp"

using nesal::DeltaRational;
using nesal::Rational;

TEST_CASE("rational parsing is exact") {
  CHECK(Rational::parse("0.05") == Rational(1, 20));
  CHECK(Rational::parse("0.1").str() == "1/10");
  CHECK(Rational::parse("-3/6") == Rational(-1, 2));
  CHECK(Rational::parse("1e-3") == Rational(1, 1000));
  CHECK(Rational::parse("2.5E2") == Rational(250));
  CHECK(Rational::parse("+7") == Rational(7));
  CHECK(Rational::parse("123456789012345678901234567890").str() == "123456789012345678901234567890");
  CHECK_THROWS_AS(Rational::parse(""), nesal::NumberFormatError);
  CHECK_THROWS_AS(Rational::parse("1/0"), nesal::NumberFormatError);
  CHECK_THROWS_AS(Rational::parse("abc"), nesal::NumberFormatError);
  CHECK_THROWS_AS(Rational::parse("1.2.3"), nesal::NumberFormatError);
}

TEST_CASE("rationals stay in lowest terms with a positive denominator") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<long long> d(-1000, 1000);
  for (int i = 0; i < 500; ++i) {
    long long p = d(rng), q = d(rng);
    if (q == 0) q = 1;
    const Rational r(p, q);
    CHECK(r.denominator() > 0);
    CHECK(gcd(mpz_class(r.numerator()), mpz_class(r.denominator())) == 1);
    CHECK(r * Rational(q) == Rational(p));
    CHECK(Rational::parse(r.str()) == r);
  }
}

TEST_CASE("rational arithmetic") {
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) - Rational(1, 2) == Rational(-1, 6));
  CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
  CHECK(Rational(2, 3) / Rational(4, 3) == Rational(1, 2));
  CHECK_THROWS(Rational(1) / Rational(0));
  CHECK(Rational(-5, 2).abs() == Rational(5, 2));
  CHECK(Rational(-1, 2) < Rational(0));
  CHECK(nesal::max(Rational(1), Rational(2)) == Rational(2));
  CHECK(Rational(-7, 2).str() == "-7/2");
}

TEST_CASE("delta-rationals order lexicographically") {
  const DeltaRational a(Rational(1), Rational(-1));  // 1 - delta
  const DeltaRational b(Rational(1));
  const DeltaRational c(Rational(1), Rational(1));
  CHECK(a < b);
  CHECK(b < c);
  CHECK(DeltaRational(Rational(0), Rational(100)) < DeltaRational(Rational(1, 1000)));
  CHECK(a.concretize(Rational(1, 4)) == Rational(3, 4));
  CHECK((c - a) == DeltaRational(Rational(0), Rational(2)));
}
