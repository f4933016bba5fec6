#include "lifelong/rational.hpp"

#include <cmath>

#include "lifelong/errors.hpp"

namespace lifelong {

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(s));
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw UsageError("zero denominator in '" + s + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw UsageError("malformed rational '" + s + "'");
  }
}

double to_double(const Rational& q) { return q.get_d(); }

namespace {
double log2_of(const BigInt& z) {
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log2(mant) + static_cast<double>(exp);
}
}  // namespace

double log2_of(const Rational& q) {
  if (sgn(q) <= 0) throw UsageError("log2 of non-positive rational");
  return log2_of(q.get_num()) - log2_of(q.get_den());
}

Rational pow(const Rational& base, unsigned exponent) {
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Rational nearest_fraction(double value, std::uint64_t max_denominator) {
  // Continued-fraction convergents, stopping before the denominator cap.
  if (!std::isfinite(value)) throw UsageError("non-finite value");
  long double x = value;
  BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    long double a = std::floor(x);
    BigInt ai(static_cast<double>(a));
    BigInt p2 = ai * p1 + p0;
    BigInt q2 = ai * q1 + q0;
    if (q2 > max_denominator) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    long double frac = x - a;
    if (frac < 1e-12L) break;
    x = 1.0L / frac;
  }
  if (q1 == 0) return Rational(BigInt(static_cast<double>(std::llround(value))));
  Rational r(p1, q1);
  r.canonicalize();
  return r;
}

namespace {
Rational floor_of(const Rational& q) {
  BigInt f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(f);
}

Rational simplest_between(const Rational& lo, const Rational& hi) {
  if (sgn(lo) <= 0 && sgn(hi) >= 0) return 0;
  if (sgn(hi) < 0) return -simplest_between(-hi, -lo);
  Rational fl = floor_of(lo);
  if (fl == lo) return lo;
  if (fl + 1 <= hi) return fl + 1;
  Rational r = fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl));
  r.canonicalize();
  return r;
}
}  // namespace

std::optional<Rational> simplest_fraction(double lo, double hi, std::uint64_t max_denominator) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) throw UsageError("bad fraction interval");
  Rational r = simplest_between(Rational(lo), Rational(hi));
  if (r.get_den() > max_denominator) return std::nullopt;
  return r;
}

}  // namespace lifelong
