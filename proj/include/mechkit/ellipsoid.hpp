#ifndef MECHKIT_ELLIPSOID_HPP
#define MECHKIT_ELLIPSOID_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "mechkit/errors.hpp"
#include "mechkit/rational.hpp"

namespace mechkit {

/** The halfspace {x : normal.x <= offset}. */
struct Halfspace {
  VectorQ normal;
  Rational offset{0};

  bool contains(const VectorQ& x) const { return normal.dot(x) <= offset; }
  /** normal.x - offset (positive when x is excluded). */
  Rational violation(const VectorQ& x) const { return normal.dot(x) - offset; }
};

/** Returns nullopt to accept the query, or a halfspace excluding it. */
using SeparationOracle = std::function<std::optional<Halfspace>(const VectorQ&)>;

/** Natural logarithm of a positive rational without overflow. */
double log_rational(const Rational& q);

/** log of the volume of the unit ball in R^d. */
double log_unit_ball_volume(Eigen::Index d);

/** Sets the BigFloat working precision for the lifetime of the guard. */
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned bits);
  ~PrecisionGuard();
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_;
};

struct EllipsoidOptions {
  /** Queries are snapped to multiples of 2^-precision_bits. */
  unsigned precision_bits = 256;
  /** Oracle cuts violated by at most this much at the query count as acceptance. */
  Rational slack{0};
  /** Stop an ellipsoid_maximize run once the value bracket is this narrow. */
  Rational value_tolerance{0};
  /** Hard cap on iterations in addition to the volume budget (0 = none). */
  std::size_t max_iterations = 0;
};

/**
 * E = {x : (x - c)^T A^{-1} (x - c) <= 1}, with A symmetric positive
 * definite and log det A tracked for the volume budget.
 */
template <typename Real>
struct EllipsoidState {
  Vector<Real> center;
  Matrix<Real> shape;
  double log_det = 0;
  std::size_t iterations = 0;
  std::size_t budget = 0;

  EllipsoidState(const VectorQ& c, const Rational& radius) {
    const Eigen::Index d = c.size();
    center.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) center(i) = rational_cast<Real>(c(i));
    Real r = rational_cast<Real>(radius);
    shape = Matrix<Real>::Identity(d, d) * (r * r);
    log_det = static_cast<double>(d) * 2.0 * log_rational(radius);
  }

  Eigen::Index dim() const { return center.size(); }

  double log_volume() const { return 0.5 * log_det + log_unit_ball_volume(dim()); }

  VectorQ snapped_center(unsigned bits) const {
    VectorQ q(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) q(i) = snap_to_dyadic(center(i), bits);
    return q;
  }

  /** Upper bound of c.x over the ellipsoid. */
  Real support(const Vector<Real>& c) const {
    using std::sqrt;
    Real s = c.dot(shape * c);
    return c.dot(center) + sqrt(s < 0 ? Real(0) : s);
  }

  /**
   * Replaces E by the minimum-volume ellipsoid containing E intersected with
   * {a.x <= b}. Returns false when that intersection is empty.
   */
  bool cut(const Vector<Real>& a, const Real& b) {
    using std::sqrt;
    using std::log;
    const Eigen::Index d = dim();
    Vector<Real> Aa = shape * a;
    Real aAa = a.dot(Aa);
    if (!(aAa > 0)) throw PrecisionError("ellipsoid shape lost positive definiteness");
    Real norm = sqrt(aAa);
    Real alpha = (a.dot(center) - b) / norm;
    if (alpha >= Real(1)) return false;
    if (alpha < Real(0)) alpha = Real(0);
    if (d == 1) {
      Real r = sqrt(shape(0, 0));
      Real lo = center(0) - r, hi = center(0) + r;
      Real bound = b / a(0);
      if (a(0) > 0) {
        if (bound < hi) hi = bound;
      } else if (bound > lo) {
        lo = bound;
      }
      if (!(hi > lo)) return false;
      Real half = (hi - lo) / 2;
      double ratio = static_cast<double>(half / r);
      center(0) = (lo + hi) / 2;
      shape(0, 0) = half * half;
      log_det += 2.0 * std::log(ratio);
      ++iterations;
      return true;
    }
    const Real dd(static_cast<double>(d));
    Real tau = (Real(1) + dd * alpha) / (dd + Real(1));
    Real sigma = Real(2) * (Real(1) + dd * alpha) / ((dd + Real(1)) * (Real(1) + alpha));
    Real stretch = dd * dd * (Real(1) - alpha * alpha) / (dd * dd - Real(1));
    Vector<Real> bvec = Aa / norm;
    center -= tau * bvec;
    shape = stretch * (shape - sigma * (bvec * bvec.transpose()));
    shape = (shape + shape.transpose().eval()) / Real(2);
    log_det += static_cast<double>(d) * static_cast<double>(log(stretch)) +
               static_cast<double>(log(Real(1) - sigma));
    ++iterations;
    return true;
  }
};

/** Iteration budget for shrinking a radius-r ball below exp(log_min_volume). */
std::size_t ellipsoid_budget(Eigen::Index d, const Rational& radius, double log_min_volume);

struct FeasibilityResult {
  bool found = false;
  VectorQ point;
  std::vector<Halfspace> certificate;
  std::size_t iterations = 0;
};

/**
 * Central/deep-cut ellipsoid method. Queries are snapped rationals; every
 * returned cut must exclude its query.
 */
template <typename Real>
FeasibilityResult ellipsoid_feasibility(Eigen::Index d, const SeparationOracle& oracle, const VectorQ& center,
                                        const Rational& radius, double log_min_volume,
                                        const EllipsoidOptions& opt = {}) {
  if (center.size() != d) throw DimensionError("ellipsoid centre has wrong dimension");
  PrecisionGuard guard(opt.precision_bits);
  EllipsoidState<Real> E(center, radius);
  E.budget = ellipsoid_budget(d, radius, log_min_volume);
  FeasibilityResult result;
  while (E.iterations < E.budget && (opt.max_iterations == 0 || E.iterations < opt.max_iterations) &&
         E.log_volume() >= log_min_volume) {
    VectorQ q = E.snapped_center(opt.precision_bits);
    auto h = oracle(q);
    if (!h || (opt.slack > 0 && h->violation(q) <= opt.slack)) {
      result.found = true;
      result.point = q;
      result.iterations = E.iterations;
      return result;
    }
    if (h->violation(q) <= 0) throw ContractError("oracle returned a cut containing its query point");
    Vector<Real> a(d);
    for (Eigen::Index i = 0; i < d; ++i) a(i) = rational_cast<Real>(h->normal(i));
    result.certificate.push_back(*h);
    if (!E.cut(a, rational_cast<Real>(h->offset))) break;
  }
  result.iterations = E.iterations;
  return result;
}

struct MaximizeResult {
  VectorQ point;
  Rational value{0};
  std::size_t iterations = 0;
};

/**
 * Sliding-objective ellipsoid: each accepted centre q tightens the region
 * with the cut c.x >= c.q. Stops once the bracket [best, support] is below
 * opt.value_tolerance or the volume budget runs out.
 */
template <typename Real>
MaximizeResult ellipsoid_maximize(const VectorQ& c, const SeparationOracle& oracle, const VectorQ& center,
                                  const Rational& radius, double log_min_volume,
                                  const EllipsoidOptions& opt = {}) {
  const Eigen::Index d = c.size();
  PrecisionGuard guard(opt.precision_bits);
  EllipsoidState<Real> E(center, radius);
  E.budget = ellipsoid_budget(d, radius, log_min_volume);
  Vector<Real> cr(d);
  for (Eigen::Index i = 0; i < d; ++i) cr(i) = rational_cast<Real>(c(i));
  std::optional<MaximizeResult> best;
  const Real tol = rational_cast<Real>(opt.value_tolerance);
  while (E.iterations < E.budget && (opt.max_iterations == 0 || E.iterations < opt.max_iterations) &&
         E.log_volume() >= log_min_volume) {
    VectorQ q = E.snapped_center(opt.precision_bits);
    auto h = oracle(q);
    if (!h || (opt.slack > 0 && h->violation(q) <= opt.slack)) {
      Rational v = c.dot(q);
      if (!best || v > best->value) best = MaximizeResult{q, v, E.iterations};
      if (c.isZero()) break;
      if (E.support(cr) - rational_cast<Real>(best->value) <= tol) break;
      if (!E.cut(-cr, -rational_cast<Real>(v))) break;
      continue;
    }
    if (h->violation(q) <= 0) throw ContractError("oracle returned a cut containing its query point");
    Vector<Real> a(d);
    for (Eigen::Index i = 0; i < d; ++i) a(i) = rational_cast<Real>(h->normal(i));
    if (!E.cut(a, rational_cast<Real>(h->offset))) break;
    if (best && E.support(cr) - rational_cast<Real>(best->value) <= tol) break;
  }
  if (!best) throw InfeasibleError("ellipsoid found no feasible point");
  best->iterations = E.iterations;
  return *best;
}

}  // namespace mechkit

#endif  // MECHKIT_ELLIPSOID_HPP
