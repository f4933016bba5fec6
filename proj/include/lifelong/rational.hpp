#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lifelong {

using BigInt = mpz_class;
using Rational = mpq_class;

// Always "p/q", including integers ("3/1").
std::string to_string(const Rational& q);
Rational parse_rational(std::string_view text);

double to_double(const Rational& q);
// log2 of a positive rational, accurate for numerators far beyond double range.
double log2_of(const Rational& q);

Rational pow(const Rational& base, unsigned exponent);

// Closest fraction with denominator at most max_denominator.
Rational nearest_fraction(double value, std::uint64_t max_denominator);

// Smallest-denominator fraction in [lo, hi]; nullopt if that denominator exceeds the cap.
std::optional<Rational> simplest_fraction(double lo, double hi, std::uint64_t max_denominator);

}  // namespace lifelong
