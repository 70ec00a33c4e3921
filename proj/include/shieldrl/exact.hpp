#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace shieldrl {

// Exact rational arithmetic for the probability bounds: prune decisions and
// oracle comparisons must not drift near their thresholds, so they are carried
// out over rationals rather than floating point.
using Rational = boost::multiprecision::cpp_rational;

// Recovers the small rational a decimal config parameter denotes (0.15 ->
// 3/20) from its double image via continued fractions. Falls back to the
// exact binary value of the double when no small denominator reproduces it.
Rational rational_from_parameter(double x);

double to_double(const Rational& r);

}  // namespace shieldrl
