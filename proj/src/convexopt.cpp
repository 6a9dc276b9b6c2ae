#include "mechkit/convexopt.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mechkit/errors.hpp"
#include "mechkit/lp.hpp"

namespace mechkit {

// ------------------------------------------------------------ geometry glue

double log_rational(const Rational& q) {
  if (q <= 0) throw PrecisionError("logarithm of a non-positive value");
  auto log_int = [](const Integer& z) {
    const std::size_t bits = boost::multiprecision::msb(z) + 1;
    if (bits <= 60) return std::log(z.convert_to<double>());
    const std::size_t shift = bits - 60;
    Integer top = z >> static_cast<unsigned>(shift);
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
  };
  return log_int(numerator(q)) - log_int(denominator(q));
}

double log_unit_ball_volume(Eigen::Index d) {
  const double h = static_cast<double>(d) / 2.0;
  return h * std::log(std::numbers::pi) - std::lgamma(h + 1.0);
}

PrecisionGuard::PrecisionGuard(unsigned bits) : saved_(BigFloat::default_precision()) {
  const unsigned digits10 = static_cast<unsigned>(std::ceil(bits * 0.30103)) + 1;
  BigFloat::default_precision(digits10);
}

PrecisionGuard::~PrecisionGuard() { BigFloat::default_precision(saved_); }

std::size_t ellipsoid_budget(Eigen::Index d, const Rational& radius, double log_min_volume) {
  const double log_start = static_cast<double>(d) * log_rational(radius) + log_unit_ball_volume(d);
  const double gap = std::max(0.0, log_start - log_min_volume);
  return static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(d + 1) * gap)) + 1;
}

// ------------------------------------------------------------------ oracles

VectorQ DirectionOracle::operator()(const VectorQ& w) const {
  if (w.size() != dim) throw DimensionError("direction has wrong dimension");
  VectorQ p;
  if (w.isZero()) {
    VectorQ e1 = VectorQ::Zero(dim);
    if (dim > 0) e1(0) = 1;
    p = evaluate(e1);
  } else {
    p = evaluate(w);
  }
  if (p.size() != dim) throw ContractError("direction oracle returned a point of wrong dimension");
  return p;
}

VectorQ WsoVerdict::reconstruct() const {
  if (points.empty()) return {};
  VectorQ s = VectorQ::Zero(points.front().size());
  for (std::size_t j = 0; j < points.size(); ++j) s += coefficients[j] * points[j];
  return s;
}

void Transcript::record(const std::string& line) {
  ++count_;
  if (!enabled_) return;
  if (lines_.size() >= keep_) lines_.erase(lines_.begin());
  lines_.push_back(line);
}

std::string Transcript::str() const {
  std::string s;
  for (const auto& l : lines_) s += l + "\n";
  return s;
}

std::string format_vector(const VectorQ& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_rational(v(i));
  }
  return s + ")";
}

Rational default_delta(Eigen::Index d, unsigned input_bits, unsigned oracle_bits) {
  return pow2(-(static_cast<long>(d) * static_cast<long>(input_bits + oracle_bits) + 16));
}

// ------------------------------------------------------------ decomposition

namespace detail {

/**
 * min |x - P lambda|_1 over the simplex, as
 *   rows i < d:  sum_j lambda_j p_ji + u_i - v_i = x_i
 *   row d:       sum_j lambda_j = 1
 * Columns: u_0, v_0, u_1, v_1, ..., then one column per point.
 */
class ProjectionLp {
 public:
  ProjectionLp(const VectorQ& x, const std::vector<VectorQ>& points) : d_(x.size()), simplex_(rhs(x)) {
    for (Eigen::Index i = 0; i < d_; ++i) {
      VectorQ e = VectorQ::Zero(d_ + 1);
      e(i) = 1;
      simplex_.add_column(e, Rational(1));
      simplex_.add_column(-e, Rational(1));
    }
    for (const auto& p : points) add_point(p);
    // Crash basis: first point plus the slack matching each residual sign.
    std::vector<std::size_t> basis;
    const VectorQ& p0 = points.front();
    for (Eigen::Index i = 0; i < d_; ++i) {
      basis.push_back(static_cast<std::size_t>(2 * i) + (x(i) - p0(i) >= 0 ? 0 : 1));
    }
    basis.push_back(static_cast<std::size_t>(2 * d_));
    if (!simplex_.set_basis(basis)) throw PrecisionError("projection LP crash basis rejected");
  }

  void add_point(const VectorQ& p) {
    VectorQ col(d_ + 1);
    col.head(d_) = p;
    col(d_) = 1;
    simplex_.add_column(std::move(col), Rational(0));
  }

  /** Moves the target point; false when the previous basis cannot be reused. */
  bool retarget(const VectorQ& x) { return simplex_.reoptimize_rhs(rhs(x)); }

  Rational solve() {
    if (simplex_.solve() != LpStatus::kOptimal) throw PrecisionError("projection LP did not solve");
    return simplex_.objective();
  }

  /** Convex coefficients of the points. */
  std::vector<Rational> coefficients(std::size_t npoints) const {
    VectorQ lam = simplex_.primal();
    std::vector<Rational> c(npoints);
    for (std::size_t j = 0; j < npoints; ++j) c[j] = lam(2 * d_ + static_cast<Eigen::Index>(j));
    return c;
  }

  /** Dual (w, z): max w.x - z with w.p_j <= z and w in [-1,1]^d. */
  std::pair<VectorQ, Rational> separator() const {
    VectorQ y = simplex_.duals();
    return {y.head(d_), Rational(-y(d_))};
  }

 private:
  static VectorQ rhs(const VectorQ& x) {
    VectorQ b(x.size() + 1);
    b.head(x.size()) = x;
    b(x.size()) = 1;
    return b;
  }

  Eigen::Index d_;
  ColumnSimplex<Rational> simplex_;
};

}  // namespace detail

namespace {

using detail::ProjectionLp;

Rational inf_residual(const VectorQ& x, const std::vector<VectorQ>& points, const std::vector<Rational>& c) {
  VectorQ r = -x;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (c[j] != 0) r += c[j] * points[j];
  }
  Rational m(0);
  for (Eigen::Index i = 0; i < r.size(); ++i) m = std::max(m, abs_q(r(i)));
  return m;
}

}  // namespace

std::vector<Rational> decompose_convex(const VectorQ& x, const std::vector<VectorQ>& points, const Rational& tol) {
  if (points.empty()) throw PrecisionError("cannot decompose over an empty point set");
  for (const auto& p : points) {
    if (p.size() != x.size()) throw DimensionError("decomposition point has wrong dimension");
  }
  ProjectionLp lp(x, points);
  lp.solve();
  auto c = lp.coefficients(points.size());
  Rational res = inf_residual(x, points, c);
  if (res > tol) {
    throw PrecisionError("point lies outside the hull: residual " + format_rational(res) + " exceeds " +
                         format_rational(tol));
  }
  return c;
}

// ---------------------------------------------------------------------- WSO

WeirdSeparationOracle::WeirdSeparationOracle(DirectionOracle A, WsoOptions opt)
    : A_(std::move(A)), opt_(std::move(opt)), transcript_(opt_.transcript) {
  if (opt_.z_bound == 0) opt_.z_bound = Rational(static_cast<long>(A_.dim));
}

WeirdSeparationOracle::~WeirdSeparationOracle() = default;
WeirdSeparationOracle::WeirdSeparationOracle(WeirdSeparationOracle&&) noexcept = default;
WeirdSeparationOracle& WeirdSeparationOracle::operator=(WeirdSeparationOracle&&) noexcept = default;

std::size_t WeirdSeparationOracle::discover(const VectorQ& w) {
  if (++oracle_calls_ > opt_.max_oracle_calls) {
    throw PrecisionError("WSO exceeded its direction-oracle budget", transcript_.str());
  }
  VectorQ p = A_(w);
  transcript_.record("A " + std::to_string(oracle_calls_) + " w=" + format_vector(w) + " -> " + format_vector(p));
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (points_[j] == p) return j;
  }
  points_.push_back(std::move(p));
  directions_.push_back(w);
  return points_.size() - 1;
}

WsoVerdict WeirdSeparationOracle::query(const VectorQ& x) {
  if (x.size() != A_.dim) throw DimensionError("WSO query has wrong dimension");
  ++queries_;
  WsoVerdict v = opt_.search == WsoSearch::kEllipsoid ? query_ellipsoid(x) : query_column_generation(x);
  transcript_.record("WSO " + std::to_string(queries_) + " x=" + format_vector(x) + " " +
                     (v.yes ? std::string("yes") : "no " + format_vector(v.separating.normal) + " <= " +
                                                       format_rational(v.separating.offset)));
  return v;
}

WsoVerdict WeirdSeparationOracle::yes_verdict(const VectorQ& x, const std::vector<std::size_t>& support,
                                              const std::vector<Rational>& coefficients) {
  WsoVerdict v;
  v.yes = true;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (coefficients[k] == 0) continue;
    v.directions.push_back(directions_[support[k]]);
    v.points.push_back(points_[support[k]]);
    v.coefficients.push_back(coefficients[k]);
  }
  Rational res = inf_residual(x, v.points, v.coefficients);
  if (res > opt_.tol_decomp) {
    throw PrecisionError("WSO decomposition residual " + format_rational(res) + " exceeds tol_decomp",
                         transcript_.str());
  }
  return v;
}

WsoVerdict WeirdSeparationOracle::no_verdict(const VectorQ& x, VectorQ w, Rational z) {
  WsoVerdict v;
  v.yes = false;
  v.separating.normal = std::move(w);
  v.separating.offset = std::move(z);
  if (v.separating.violation(x) <= 0) {
    throw ContractError("WSO produced a halfspace that does not exclude the query", transcript_.str());
  }
  return v;
}

WsoVerdict WeirdSeparationOracle::query_column_generation(const VectorQ& x) {
  const Eigen::Index d = A_.dim;
  if (points_.empty()) {
    VectorQ w(d);
    for (Eigen::Index i = 0; i < d; ++i) w(i) = x(i) > 0 ? 1 : (x(i) < 0 ? -1 : 0);
    discover(w);
  }
  if (!projection_ || !projection_->retarget(x)) {
    projection_ = std::make_unique<ProjectionLp>(x, points_);
    projected_points_ = points_.size();
  }
  ProjectionLp& lp = *projection_;
  for (; projected_points_ < points_.size(); ++projected_points_) lp.add_point(points_[projected_points_]);
  std::size_t& known = projected_points_;
  for (;;) {
    Rational gap = lp.solve();
    if (gap < opt_.delta) {
      std::vector<std::size_t> support(known);
      for (std::size_t j = 0; j < known; ++j) support[j] = j;
      return yes_verdict(x, support, lp.coefficients(known));
    }
    auto [w, z] = lp.separator();
    std::size_t idx = discover(w);
    const VectorQ& p = points_[idx];
    if (w.dot(p) <= z) return no_verdict(x, std::move(w), std::move(z));
    if (idx < known) {
      throw ContractError("direction oracle is inconsistent with its cached output", transcript_.str());
    }
    lp.add_point(p);
    known = points_.size();
  }
}

WsoVerdict WeirdSeparationOracle::query_ellipsoid(const VectorQ& x) {
  const Eigen::Index d = A_.dim;
  const Rational zb = opt_.z_bound;
  std::optional<std::pair<VectorQ, Rational>> found;
  SeparationOracle inner = [&](const VectorQ& q) -> std::optional<Halfspace> {
    VectorQ w = q.head(d);
    const Rational& z = q(d);
    auto unit = [&](Eigen::Index i, int sign, const Rational& bound) {
      Halfspace h;
      h.normal = VectorQ::Zero(d + 1);
      h.normal(i) = sign;
      h.offset = bound;
      return h;
    };
    for (Eigen::Index i = 0; i < d; ++i) {
      if (w(i) > 1) return unit(i, 1, Rational(1));
      if (w(i) < -1) return unit(i, -1, Rational(1));
    }
    if (z > zb) return unit(d, 1, zb);
    if (z < -zb) return unit(d, -1, zb);
    auto point_cut = [&](const VectorQ& p) {
      Halfspace h;
      h.normal.resize(d + 1);
      h.normal.head(d) = p;
      h.normal(d) = -1;
      h.offset = 0;
      return h;
    };
    for (const auto& p : points_) {
      if (w.dot(p) > z) return point_cut(p);
    }
    const VectorQ& p = points_[discover(w)];
    if (w.dot(p) > z) return point_cut(p);
    if (w.dot(x) < z + opt_.delta) {
      Halfspace h;
      h.normal.resize(d + 1);
      h.normal.head(d) = -x;
      h.normal(d) = 1;
      h.offset = -opt_.delta;
      return h;
    }
    found = std::make_pair(w, z);
    return std::nullopt;
  };
  Rational xnorm(0);
  for (Eigen::Index i = 0; i < d; ++i) xnorm += abs_q(x(i));
  const double log_min =
      static_cast<double>(d + 1) *
      (log_rational(opt_.delta) - std::log(8.0 * static_cast<double>(d + 1) * (1.0 + to_double(xnorm) + to_double(zb))));
  const Rational radius = Rational(static_cast<long>(d + 1)) + zb;
  EllipsoidOptions eo;
  eo.precision_bits = opt_.precision_bits;
  auto res = ellipsoid_feasibility<BigFloat>(d + 1, inner, VectorQ::Zero(d + 1), radius, log_min, eo);
  if (res.found && found) return no_verdict(x, found->first, found->second);
  if (points_.empty()) discover(VectorQ::Zero(d));
  std::vector<Rational> c;
  try {
    c = decompose_convex(x, points_, opt_.tol_decomp);
  } catch (const PrecisionError& e) {
    throw PrecisionError(e.what(), transcript_.str());
  }
  std::vector<std::size_t> support(points_.size());
  for (std::size_t j = 0; j < support.size(); ++j) support[j] = j;
  return yes_verdict(x, support, c);
}

WsoVerdict wso_query(const VectorQ& x, const DirectionOracle& A, const Rational& delta, WsoSearch search) {
  WsoOptions opt;
  opt.delta = delta;
  opt.tol_decomp = std::max(delta, opt.tol_decomp);
  opt.search = search;
  WeirdSeparationOracle wso(A, opt);
  return wso.query(x);
}

// ------------------------------------------------------------ outer solvers

OracleLpResult maximize_cutting_plane(const OracleLp& lp, const SeparationOracle& oracle, std::size_t max_iterations) {
  const Eigen::Index n = lp.objective.size();
  if (lp.lower.size() != n || lp.upper.size() != n) throw DimensionError("LP bounds have wrong dimension");
  // Dual: min h.y  s.t.  G^T y = c, y >= 0, one column per primal row.
  ColumnSimplex<Rational> dual(lp.objective);
  std::vector<std::size_t> basis(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    VectorQ up = VectorQ::Zero(n), lo = VectorQ::Zero(n);
    up(j) = 1;
    lo(j) = -1;
    std::size_t cu = dual.add_column(up, lp.upper(j));
    std::size_t cl = dual.add_column(lo, Rational(-lp.lower(j)));
    basis[static_cast<std::size_t>(j)] = lp.objective(j) >= 0 ? cu : cl;
  }
  for (const auto& h : lp.rows) dual.add_column(h.normal, h.offset);
  if (!dual.set_basis(basis)) throw PrecisionError("cutting-plane crash basis rejected");
  OracleLpResult out;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    LpStatus st = dual.solve();
    if (st == LpStatus::kUnbounded) throw InfeasibleError("oracle LP is infeasible");
    if (st != LpStatus::kOptimal) throw PrecisionError("cutting-plane dual did not solve");
    VectorQ x = dual.duals();
    auto cut = oracle(x);
    out.iterations = it + 1;
    if (!cut) {
      out.x = std::move(x);
      out.value = lp.objective.dot(out.x);
      return out;
    }
    if (cut->violation(x) <= 0) throw ContractError("separation oracle returned a cut containing its query");
    dual.add_column(cut->normal, cut->offset);
    out.cuts.push_back(std::move(*cut));
  }
  throw PrecisionError("cutting-plane iteration limit reached");
}

OracleLpResult maximize_ellipsoid(const OracleLp& lp, const SeparationOracle& oracle, const EllipsoidOptions& opt,
                                  double log_min_volume) {
  const Eigen::Index n = lp.objective.size();
  SeparationOracle full = [&](const VectorQ& x) -> std::optional<Halfspace> {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x(j) > lp.upper(j) || x(j) < lp.lower(j)) {
        Halfspace h;
        h.normal = VectorQ::Zero(n);
        const bool high = x(j) > lp.upper(j);
        h.normal(j) = high ? 1 : -1;
        h.offset = high ? lp.upper(j) : Rational(-lp.lower(j));
        return h;
      }
    }
    for (const auto& h : lp.rows) {
      if (h.violation(x) > 0) return h;
    }
    return oracle(x);
  };
  VectorQ center = (lp.lower + lp.upper) / 2;
  double r2 = 0;
  for (Eigen::Index j = 0; j < n; ++j) r2 += std::pow(to_double(lp.upper(j) - lp.lower(j)) / 2.0, 2);
  Rational radius = snap_to_dyadic(std::sqrt(r2), 20) + pow2(-10);
  auto res = ellipsoid_maximize<BigFloat>(lp.objective, full, center, radius, log_min_volume, opt);
  OracleLpResult out;
  out.x = res.point;
  out.value = res.value;
  out.iterations = res.iterations;
  return out;
}

}  // namespace mechkit
