#include "shieldrl/exact.hpp"

#include <cmath>
#include <limits>

#include "shieldrl/errors.hpp"

namespace shieldrl {

Rational rational_from_parameter(double x) {
  if (!std::isfinite(x)) throw DomainError("parameter must be finite");
  bool negative = x < 0;
  double ax = std::abs(x);

  // Continued-fraction convergents of ax; the first convergent whose double
  // image equals ax is the rational the decimal literal denoted.
  long long p_prev = 1, q_prev = 0;
  long long p_curr = static_cast<long long>(std::floor(ax));
  long long q_curr = 1;
  double frac = ax - std::floor(ax);
  for (int iter = 0; iter < 48; ++iter) {
    Rational candidate(p_curr, q_curr);
    if (to_double(candidate) == ax)
      return negative ? -candidate : candidate;
    if (frac <= 0.0) break;
    double inv = 1.0 / frac;
    double a_f = std::floor(inv);
    if (a_f > 1e15) break;
    long long a = static_cast<long long>(a_f);
    long long p_next = a * p_curr + p_prev;
    long long q_next = a * q_curr + q_prev;
    if (q_next > 1'000'000'000'000ll || p_next < 0 || q_next < 0) break;
    p_prev = p_curr;
    q_prev = q_curr;
    p_curr = p_next;
    q_curr = q_next;
    frac = inv - a_f;
  }

  // Exact binary expansion of the double.
  int exp = 0;
  double mantissa = std::frexp(ax, &exp);
  long long scaled =
      static_cast<long long>(std::ldexp(mantissa, std::numeric_limits<double>::digits));
  Rational r(scaled);
  int shift = exp - std::numeric_limits<double>::digits;
  if (shift >= 0)
    r *= Rational(boost::multiprecision::cpp_int(1) << shift);
  else
    r /= Rational(boost::multiprecision::cpp_int(1) << -shift);
  return negative ? -r : r;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace shieldrl
