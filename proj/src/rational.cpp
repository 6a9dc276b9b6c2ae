#include "mechkit/rational.hpp"

#include <cmath>
#include <stdexcept>

#include "mechkit/errors.hpp"

namespace mechkit {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

Integer parse_integer(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw ValidationError("malformed rational \"" + std::string(s) + "\"");
  Integer n{std::string(s)};
  return negative ? Integer(-n) : n;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw ValidationError("empty rational literal");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Integer num = parse_integer(text.substr(0, slash));
    Integer den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw ValidationError("zero denominator in \"" + std::string(text) + "\"");
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole.front() == '-';
    if (!frac.empty() && !all_digits(frac)) {
      throw ValidationError("malformed rational \"" + std::string(text) + "\"");
    }
    Integer w = (whole.empty() || whole == "-" || whole == "+") ? Integer(0) : parse_integer(whole);
    Integer f = frac.empty() ? Integer(0) : Integer{std::string(frac)};
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac.size()));
    Rational r = Rational(boost::multiprecision::abs(w)) + Rational(f, scale);
    return negative ? Rational(-r) : r;
  }
  return Rational(parse_integer(text));
}

std::string format_rational(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::size_t bit_size(const Rational& q) {
  auto bits = [](const Integer& z) -> std::size_t {
    return z == 0 ? 1 : boost::multiprecision::msb(boost::multiprecision::abs(z)) + 1;
  };
  return bits(numerator(q)) + bits(denominator(q));
}

Rational pow2(long e) {
  Integer one(1);
  if (e >= 0) return Rational(Integer(one << static_cast<unsigned>(e)));
  return Rational(one, Integer(one << static_cast<unsigned>(-e)));
}

Rational snap_to_dyadic(double value, unsigned bits) {
  return snap_to_dyadic(static_cast<long double>(value), bits);
}

Rational snap_to_dyadic(long double value, unsigned bits) {
  if (!std::isfinite(value)) throw PrecisionError("non-finite value in ellipsoid geometry");
  // The leading 63 mantissa bits of a long double are recovered exactly
  // through frexp before rounding to the requested grid.
  int exponent = 0;
  long double mant = std::frexp(value, &exponent);
  long double scaled = std::ldexp(mant, 63);
  long long m = static_cast<long long>(scaled);
  Rational exact = Rational(Integer(m)) * pow2(static_cast<long>(exponent) - 63);
  Rational grid = exact * pow2(static_cast<long>(bits));
  Integer floor_n = numerator(grid) / denominator(grid);
  if (grid < 0 && Rational(floor_n) != grid) floor_n -= 1;
  Rational rem = grid - Rational(floor_n);
  if (rem * 2 >= 1) floor_n += 1;
  return Rational(floor_n) * pow2(-static_cast<long>(bits));
}

Rational snap_to_dyadic(const BigFloat& value, unsigned bits) {
  if (!boost::multiprecision::isfinite(value)) {
    throw PrecisionError("non-finite value in ellipsoid geometry");
  }
  BigFloat scaled = boost::multiprecision::ldexp(value, static_cast<int>(bits));
  BigFloat rounded = boost::multiprecision::round(scaled);
  Integer n;
  mpfr_get_z(n.backend().data(), rounded.backend().data(), MPFR_RNDN);
  return Rational(n) * pow2(-static_cast<long>(bits));
}

}  // namespace mechkit
