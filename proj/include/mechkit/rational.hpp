// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MECHKIT_RATIONAL_HPP
#define MECHKIT_RATIONAL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace mechkit {

/** Exact rational scalar. Expression templates are disabled so that the
 * type composes cleanly with Eigen and `auto`. */
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

/** Variable-precision binary float used by the ellipsoid geometry. */
using BigFloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                               boost::multiprecision::et_off>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorQ = Vector<Rational>;
using MatrixQ = Matrix<Rational>;

/** Parses "num/den", "num", or a finite decimal such as "0.25". */
Rational parse_rational(std::string_view text);

/** Canonical "num/den" form; integers are written as "num/1". */
std::string format_rational(const Rational& q);

/** Nearest double (for diagnostics and sampling only). */
double to_double(const Rational& q);

/** Number of bits needed for numerator plus denominator. */
std::size_t bit_size(const Rational& q);

/** 2^e as an exact rational, e may be negative. */
Rational pow2(long e);

/** Rounds `value` to the nearest multiple of 2^-bits. */
Rational snap_to_dyadic(double value, unsigned bits);
Rational snap_to_dyadic(long double value, unsigned bits);
Rational snap_to_dyadic(const BigFloat& value, unsigned bits);
inline Rational snap_to_dyadic(const Rational& value, unsigned) { return value; }

/** Converts a rational to another scalar type at that type's precision. */
template <typename Real>
Real rational_cast(const Rational& q) {
  return Real(numerator(q)) / Real(denominator(q));
}
template <>
inline double rational_cast<double>(const Rational& q) { return to_double(q); }
template <>
inline long double rational_cast<long double>(const Rational& q) {
  return q.convert_to<long double>();
}
template <>
inline Rational rational_cast<Rational>(const Rational& q) { return q; }

inline Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace mechkit

#endif  // MECHKIT_RATIONAL_HPP
