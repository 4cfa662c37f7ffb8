#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace qrec {

using Rational = mpq_class;
using Integer = mpz_class;

// Accepts "num/den", an integer, or a decimal literal ("0.125", "1e-3").
// Decimals are converted exactly.
Rational parse_rational(std::string_view text);

// Canonical "num/den" form; integers are written as "n/1".
std::string to_string(const Rational& q);

double to_double(const Rational& q);

// Exact conversion of a finite double.
Rational from_double(double x);

// Natural logarithm of a positive rational, accurate even when numerator or
// denominator overflow a double.
double log_of(const Rational& q);
double log_of(const Integer& z);

Rational pow(const Rational& q, unsigned long e);

}  // namespace qrec
