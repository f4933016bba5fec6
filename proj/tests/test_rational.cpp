#include <cmath>

#include "doctest.h"
#include "lifelong/errors.hpp"
#include "lifelong/rational.hpp"

using namespace lifelong;

TEST_CASE("rational text form") {
  CHECK(to_string(Rational(3)) == "3/1");
  Rational q(-6, 4);
  q.canonicalize();
  CHECK(to_string(q) == "-3/2");
  CHECK(parse_rational("6/4") == Rational(3, 2));
  CHECK(parse_rational("-7") == Rational(-7));
  CHECK(parse_rational("123456789012345678901234567890/3") ==
        Rational(BigInt("41152263004115226300411522630")));
  CHECK_THROWS_AS(parse_rational("1/0"), UsageError);
  CHECK_THROWS_AS(parse_rational("x/2"), UsageError);
}

TEST_CASE("power and logarithm") {
  CHECK(pow(Rational(3, 2), 3) == Rational(27, 8));
  CHECK(pow(Rational(5), 0) == Rational(1));
  CHECK(log2_of(Rational(8)) == doctest::Approx(3.0));
  CHECK(log2_of(Rational(1, 4)) == doctest::Approx(-2.0));
  // 2^2000 / 3 overflows double but not the logarithm.
  BigInt big;
  mpz_ui_pow_ui(big.get_mpz_t(), 2, 2000);
  CHECK(log2_of(Rational(big, 3)) == doctest::Approx(2000.0 - std::log2(3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(log2_of(Rational(0)), UsageError);
  CHECK_THROWS_AS(log2_of(Rational(-1)), UsageError);
}

TEST_CASE("nearest fraction under a denominator cap") {
  CHECK(nearest_fraction(0.75, 64) == Rational(3, 4));
  CHECK(nearest_fraction(-2.5, 64) == Rational(-5, 2));
  CHECK(nearest_fraction(3.0 + 1e-9, 64) == Rational(3));
  CHECK(nearest_fraction(1.0 / 3.0 + 1e-7, 64) == Rational(1, 3));
  CHECK(nearest_fraction(7.999999, 4) == Rational(8));
  CHECK_THROWS_AS(nearest_fraction(NAN, 4), UsageError);
}

TEST_CASE("simplest fraction in an interval") {
  CHECK(simplest_fraction(1.78, 2.36, 64) == Rational(2));
  CHECK(simplest_fraction(-0.1, 0.2, 64) == Rational(0));
  CHECK(simplest_fraction(0.3, 0.36, 64) == Rational(1, 3));
  CHECK(simplest_fraction(-0.36, -0.3, 64) == Rational(-1, 3));
  CHECK(simplest_fraction(1.5, 1.5, 64) == Rational(3, 2));
  CHECK(simplest_fraction(2.71, 2.72, 64) == Rational(19, 7));
  CHECK_FALSE(simplest_fraction(0.3333, 0.33334, 2).has_value());
  CHECK_THROWS_AS(simplest_fraction(1.0, 0.5, 64), UsageError);
  // brute force: no smaller denominator fits
  for (int a = 1; a < 40; ++a) {
    double lo = a / 41.0, hi = lo + 0.013;
    auto r = simplest_fraction(lo, hi, 1000);
    REQUIRE(r.has_value());
    CHECK(r->get_d() >= lo);
    CHECK(r->get_d() <= hi);
    for (long q = 1; q < r->get_den().get_si(); ++q)
      CHECK(std::ceil(lo * q) > std::floor(hi * q));
  }
}
