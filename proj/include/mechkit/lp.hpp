#ifndef MECHKIT_LP_HPP
#define MECHKIT_LP_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mechkit/errors.hpp"
#include "mechkit/rational.hpp"

namespace mechkit {

/** Sign tolerance: zero for exact scalars, a small relative slack for floats. */
template <typename Scalar>
struct LpTolerance {
  static Scalar value() {
    if constexpr (std::is_floating_point_v<Scalar>) {
      return Scalar(1e-11);
    } else {
      return Scalar(0);
    }
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

/**
 * Revised primal simplex for
 *
 *     minimize c.x  subject to  A x = b,  x >= 0,
 *
 * with a fixed row count and a column set that may grow between solves.
 * Added columns keep the current basis primal feasible, so repeated solves
 * after `add_column` are warm started. The basis inverse is held explicitly;
 * for exact scalars no refactorisation is ever needed.
 *
 * Pricing is Dantzig's rule; after a run of degenerate pivots the solver
 * switches to Bland's rule until an improving pivot occurs, which rules out
 * cycling.
 */
template <typename Scalar>
class ColumnSimplex {
 public:
  explicit ColumnSimplex(Vector<Scalar> rhs) : b_(std::move(rhs)) {}

  Eigen::Index rows() const { return b_.size(); }
  std::size_t columns() const { return cols_.size(); }

  /** Appends a column and returns its index. */
  std::size_t add_column(Vector<Scalar> a, Scalar cost) {
    if (a.size() != rows()) throw DimensionError("simplex column has wrong length");
    cols_.push_back(std::move(a));
    cost_.push_back(std::move(cost));
    artificial_.push_back(false);
    optimal_ = false;
    return cols_.size() - 1;
  }

  const Vector<Scalar>& column(std::size_t j) const { return cols_[j]; }
  const Scalar& cost(std::size_t j) const { return cost_[j]; }

  /** Replaces the right-hand side. The basis is discarded. */
  void set_rhs(Vector<Scalar> rhs) {
    if (rhs.size() != rows()) throw DimensionError("simplex rhs has wrong length");
    b_ = std::move(rhs);
    basis_.clear();
    optimal_ = false;
  }

  /**
   * Installs a basis given by one column per row. Returns false (leaving no
   * basis installed) if it is singular or not primal feasible.
   */
  bool set_basis(const std::vector<std::size_t>& basis) {
    const Eigen::Index m = rows();
    if (static_cast<Eigen::Index>(basis.size()) != m) return false;
    Matrix<Scalar> B(m, m);
    for (Eigen::Index r = 0; r < m; ++r) B.col(r) = cols_[basis[r]];
    auto inv = invert(B);
    if (!inv) return false;
    Vector<Scalar> xb = (*inv) * b_;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (xb(r) < -LpTolerance<Scalar>::value()) return false;
    }
    binv_ = std::move(*inv);
    xb_ = std::move(xb);
    basis_ = basis;
    optimal_ = false;
    return true;
  }

  bool has_basis() const { return !basis_.empty(); }

  /**
   * Replaces the right-hand side and restores optimality with dual simplex
   * pivots from the basis of the last optimal solve. Returns false, leaving
   * the solver untouched, when there is no such basis (columns were added
   * since, or it holds an artificial column); callers then start afresh.
   */
  bool reoptimize_rhs(const Vector<Scalar>& rhs, std::size_t max_pivots = 1000000) {
    if (rhs.size() != rows()) throw DimensionError("simplex rhs has wrong length");
    if (basis_.empty() || !optimal_) return false;
    const Eigen::Index m = rows();
    const Scalar tol = LpTolerance<Scalar>::value();
    sync_flags();
    for (auto j : basis_) {
      if (artificial_[j]) return false;
    }
    auto reduced = [&](const Vector<Scalar>& y, std::size_t j) { return cost_[j] - y.dot(cols_[j]); };
    b_ = rhs;
    xb_ = binv_ * b_;
    std::size_t degenerate_run = 0;
    for (std::size_t it = 0; it < max_pivots; ++it) {
      const bool bland = degenerate_run > 32;
      Eigen::Index leave = -1;
      for (Eigen::Index r = 0; r < m; ++r) {
        if (!(xb_(r) < -tol)) continue;
        if (leave < 0 || (bland ? basis_[r] < basis_[leave] : xb_(r) < xb_(leave))) leave = r;
      }
      if (leave < 0) return true;
      const Vector<Scalar> y = duals();
      const Vector<Scalar> row = binv_.row(leave).transpose();
      std::optional<std::size_t> entering;
      Scalar ratio(0);
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (artificial_[j] || in_basis(j)) continue;
        const Scalar alpha = row.dot(cols_[j]);
        if (!(alpha < -tol)) continue;
        Scalar q = reduced(y, j) / -alpha;
        if (!entering || q < ratio) {
          entering = j;
          ratio = std::move(q);
        }
      }
      if (!entering) throw InfeasibleError("dual simplex found the new right-hand side infeasible");
      degenerate_run = (ratio == 0) ? degenerate_run + 1 : 0;
      Vector<Scalar> u = binv_ * cols_[*entering];
      pivot(leave, *entering, u);
    }
    throw PrecisionError("simplex pivot limit reached");
  }

  /**
   * Optimises from the installed basis, or from a two-phase start with
   * artificial columns if none is installed.
   */
  LpStatus solve(std::size_t max_pivots = 1000000) {
    if (basis_.empty()) {
      if (!phase_one(max_pivots)) return LpStatus::kInfeasible;
    }
    return iterate(max_pivots, false);
  }

  /** Primal values indexed by column (artificials report 0). */
  Vector<Scalar> primal() const {
    Vector<Scalar> x = Vector<Scalar>::Zero(static_cast<Eigen::Index>(cols_.size()));
    for (std::size_t r = 0; r < basis_.size(); ++r) x(basis_[r]) = xb_(r);
    return x;
  }

  /** Simplex multipliers y with reduced cost c_j - y.a_j >= 0 at optimality. */
  Vector<Scalar> duals() const {
    const Eigen::Index m = rows();
    Vector<Scalar> cb(m);
    for (Eigen::Index r = 0; r < m; ++r) cb(r) = cost_[basis_[r]];
    return binv_.transpose() * cb;
  }

  Scalar objective() const {
    Scalar v(0);
    for (std::size_t r = 0; r < basis_.size(); ++r) v += cost_[basis_[r]] * xb_(r);
    return v;
  }

  const std::vector<std::size_t>& basis() const { return basis_; }
  std::size_t pivots() const { return pivots_; }

 private:
  static std::optional<Matrix<Scalar>> invert(const Matrix<Scalar>& B) {
    // Gauss-Jordan with first-nonzero pivoting for exact scalars and
    // partial pivoting for floats.
    const Eigen::Index m = B.rows();
    Matrix<Scalar> a = B;
    Matrix<Scalar> inv = Matrix<Scalar>::Identity(m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      Eigen::Index piv = -1;
      if constexpr (std::is_floating_point_v<Scalar>) {
        Scalar best(0);
        for (Eigen::Index r = c; r < m; ++r) {
          Scalar mag = a(r, c) < 0 ? Scalar(-a(r, c)) : a(r, c);
          if (mag > best) { best = mag; piv = r; }
        }
        if (best <= Scalar(1e-13)) piv = -1;
      } else {
        for (Eigen::Index r = c; r < m && piv < 0; ++r) {
          if (a(r, c) != 0) piv = r;
        }
      }
      if (piv < 0) return std::nullopt;
      a.row(c).swap(a.row(piv));
      inv.row(c).swap(inv.row(piv));
      Scalar p = a(c, c);
      a.row(c) /= p;
      inv.row(c) /= p;
      for (Eigen::Index r = 0; r < m; ++r) {
        if (r == c || a(r, c) == 0) continue;
        Scalar f = a(r, c);
        a.row(r) -= f * a.row(c);
        inv.row(r) -= f * inv.row(c);
      }
    }
    return inv;
  }

  bool phase_one(std::size_t max_pivots) {
    const Eigen::Index m = rows();
    // Artificial identity columns, signed so that the start is feasible.
    std::vector<Scalar> saved_cost = cost_;
    for (auto& c : cost_) c = Scalar(0);
    std::size_t first_art = cols_.size();
    std::vector<std::size_t> basis(static_cast<std::size_t>(m));
    for (Eigen::Index r = 0; r < m; ++r) {
      Vector<Scalar> e = Vector<Scalar>::Zero(m);
      e(r) = b_(r) < 0 ? Scalar(-1) : Scalar(1);
      cols_.push_back(std::move(e));
      cost_.push_back(Scalar(1));
      artificial_.push_back(true);
      basis[static_cast<std::size_t>(r)] = cols_.size() - 1;
    }
    binv_ = Matrix<Scalar>::Identity(m, m);
    xb_ = b_;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (b_(r) < 0) {
        binv_(r, r) = Scalar(-1);
        xb_(r) = -b_(r);
      }
    }
    basis_ = basis;
    iterate(max_pivots, true);
    sync_flags();
    Scalar infeas = objective();
    cost_ = std::move(saved_cost);
    for (std::size_t j = first_art; j < cols_.size(); ++j) cost_.push_back(Scalar(0));
    cost_.resize(cols_.size(), Scalar(0));
    if (infeas > LpTolerance<Scalar>::value() * Scalar(1000)) {
      drop_artificials(first_art);
      basis_.clear();
      return false;
    }
    // Drive artificials out of the basis where a structural column can
    // replace them; the remainder sit on redundant rows at level zero.
    for (Eigen::Index r = 0; r < m; ++r) {
      if (!artificial_[basis_[static_cast<std::size_t>(r)]]) continue;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (in_basis(j)) continue;
        Scalar ur = binv_.row(r).dot(cols_[j]);
        if (ur != 0 && !(std::is_floating_point_v<Scalar> && abs_s(ur) < Scalar(1e-9))) {
          Vector<Scalar> u = binv_ * cols_[j];
          pivot(r, j, u);
          break;
        }
      }
    }
    return true;
  }

  void drop_artificials(std::size_t first_art) {
    cols_.resize(first_art);
    cost_.resize(first_art);
    artificial_.resize(first_art);
  }

  bool in_basis(std::size_t j) const { return j < is_basic_.size() && is_basic_[j]; }

  void sync_flags() {
    is_basic_.assign(cols_.size(), false);
    for (auto j : basis_) is_basic_[j] = true;
  }

  static Scalar abs_s(const Scalar& s) { return s < 0 ? Scalar(-s) : s; }

  void pivot(Eigen::Index r, std::size_t entering, const Vector<Scalar>& u) {
    const Eigen::Index m = rows();
    Scalar ur = u(r);
    Scalar theta = xb_(r) / ur;
    binv_.row(r) /= ur;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == r || u(i) == 0) continue;
      binv_.row(i) -= u(i) * binv_.row(r);
      xb_(i) -= u(i) * theta;
    }
    xb_(r) = theta;
    is_basic_[basis_[static_cast<std::size_t>(r)]] = false;
    basis_[static_cast<std::size_t>(r)] = entering;
    is_basic_[entering] = true;
    ++pivots_;
    if constexpr (std::is_floating_point_v<Scalar>) {
      if (pivots_ % 64 == 0) refactor();
    }
  }

  void refactor() {
    const Eigen::Index m = rows();
    Matrix<Scalar> B(m, m);
    for (Eigen::Index r = 0; r < m; ++r) B.col(r) = cols_[basis_[r]];
    if (auto inv = invert(B)) {
      binv_ = std::move(*inv);
      xb_ = binv_ * b_;
    }
  }

  LpStatus iterate(std::size_t max_pivots, bool phase1) {
    const Eigen::Index m = rows();
    const Scalar tol = LpTolerance<Scalar>::value();
    sync_flags();
    std::size_t degenerate_run = 0;
    for (std::size_t it = 0; it < max_pivots; ++it) {
      Vector<Scalar> cb(m);
      for (Eigen::Index r = 0; r < m; ++r) cb(r) = cost_[basis_[r]];
      Vector<Scalar> y = binv_.transpose() * cb;
      const bool bland = degenerate_run > 32;
      std::optional<std::size_t> entering;
      Scalar best(0);
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (!phase1 && artificial_[j]) continue;
        if (in_basis(j)) continue;
        Scalar d = cost_[j] - y.dot(cols_[j]);
        if (d < -tol) {
          if (bland) { entering = j; break; }
          if (!entering || d < best) { best = d; entering = j; }
        }
      }
      if (!entering) {
        optimal_ = !phase1;
        return LpStatus::kOptimal;
      }
      Vector<Scalar> u = binv_ * cols_[*entering];
      Eigen::Index leave = -1;
      Scalar ratio(0);
      for (Eigen::Index r = 0; r < m; ++r) {
        const bool art = artificial_[basis_[r]];
        if (!phase1 && art && u(r) != 0 && abs_s(u(r)) > tol) {
          // A zero-level artificial on a redundant row must not grow.
          if (leave < 0 || ratio > 0 || basis_[r] < basis_[leave]) {
            leave = r;
            ratio = Scalar(0);
          }
          continue;
        }
        if (!(u(r) > tol)) continue;
        Scalar q = xb_(r) / u(r);
        if (leave < 0 || q < ratio || (q == ratio && basis_[r] < basis_[leave])) {
          leave = r;
          ratio = q;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate_run = (ratio == 0) ? degenerate_run + 1 : 0;
      pivot(leave, *entering, u);
    }
    throw PrecisionError("simplex pivot limit reached");
  }

  Vector<Scalar> b_;
  std::vector<Vector<Scalar>> cols_;
  std::vector<Scalar> cost_;
  std::vector<bool> artificial_;
  std::vector<std::size_t> basis_;
  std::vector<bool> is_basic_;
  Matrix<Scalar> binv_;
  Vector<Scalar> xb_;
  std::size_t pivots_ = 0;
  bool optimal_ = false;
};

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

/** A row sum_j coeffs[j] x_j (sense) rhs over a dense variable vector. */
template <typename Scalar>
struct LinearRow {
  Vector<Scalar> coeffs;
  Sense sense = Sense::kLessEqual;
  Scalar rhs{0};
};

/**
 * A general LP in natural form. Every variable has a finite lower bound
 * unless `lower[j]` is empty, in which case it is free.
 */
template <typename Scalar>
struct LinearProgram {
  Eigen::Index num_vars = 0;
  std::vector<std::optional<Scalar>> lower;
  std::vector<std::optional<Scalar>> upper;
  std::vector<LinearRow<Scalar>> rows;
  Vector<Scalar> objective;
  bool maximize = true;

  explicit LinearProgram(Eigen::Index n = 0)
      : num_vars(n),
        lower(static_cast<std::size_t>(n), Scalar(0)),
        upper(static_cast<std::size_t>(n)),
        objective(Vector<Scalar>::Zero(n)) {}

  Vector<Scalar> zero_row() const { return Vector<Scalar>::Zero(num_vars); }

  void add_row(Vector<Scalar> coeffs, Sense sense, Scalar rhs) {
    rows.push_back({std::move(coeffs), sense, std::move(rhs)});
  }
};

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector<Scalar> x;
  Scalar value{0};
};

/** Solves a natural-form LP with the column simplex (two-phase start). */
template <typename Scalar>
LpResult<Scalar> solve_lp(const LinearProgram<Scalar>& lp) {
  const Eigen::Index n = lp.num_vars;
  // Structural column map: x_j = shift_j + sum sign * y_col.
  struct Piece { std::size_t col; int sign; };
  std::vector<std::vector<Piece>> pieces(static_cast<std::size_t>(n));
  Vector<Scalar> shift = Vector<Scalar>::Zero(n);
  std::size_t ncols = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& lo = lp.lower[static_cast<std::size_t>(j)];
    if (lo) {
      shift(j) = *lo;
      pieces[static_cast<std::size_t>(j)].push_back({ncols++, +1});
    } else {
      pieces[static_cast<std::size_t>(j)].push_back({ncols++, +1});
      pieces[static_cast<std::size_t>(j)].push_back({ncols++, -1});
    }
  }
  std::vector<LinearRow<Scalar>> rows = lp.rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& up = lp.upper[static_cast<std::size_t>(j)];
    if (!up) continue;
    Vector<Scalar> e = Vector<Scalar>::Zero(n);
    e(j) = Scalar(1);
    rows.push_back({std::move(e), Sense::kLessEqual, *up});
  }
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  std::size_t nslack = 0;
  for (const auto& row : rows) {
    if (row.sense != Sense::kEqual) ++nslack;
  }
  const std::size_t total = ncols + nslack;
  std::vector<Vector<Scalar>> cols(total, Vector<Scalar>::Zero(m));
  Vector<Scalar> rhs(m);
  std::vector<std::optional<std::size_t>> crash(static_cast<std::size_t>(m));
  std::size_t slack = ncols;
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    Scalar b = row.rhs - row.coeffs.dot(shift);
    Scalar sign = b < 0 ? Scalar(-1) : Scalar(1);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (row.coeffs(j) == 0) continue;
      for (const auto& p : pieces[static_cast<std::size_t>(j)]) {
        cols[p.col](r) = sign * row.coeffs(j) * Scalar(p.sign);
      }
    }
    if (row.sense != Sense::kEqual) {
      Scalar s = row.sense == Sense::kLessEqual ? Scalar(1) : Scalar(-1);
      cols[slack](r) = sign * s;
      if (sign * s > 0) crash[static_cast<std::size_t>(r)] = slack;
      ++slack;
    }
    rhs(r) = sign * b;
  }
  // Objective, expressed as minimisation over the shifted columns.
  std::vector<Scalar> costs(total, Scalar(0));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (const auto& p : pieces[static_cast<std::size_t>(j)]) {
      Scalar c = lp.objective(j) * Scalar(p.sign);
      costs[p.col] = lp.maximize ? Scalar(-c) : c;
    }
  }
  ColumnSimplex<Scalar> solver(rhs);
  for (std::size_t c = 0; c < total; ++c) solver.add_column(cols[c], costs[c]);
  if (std::all_of(crash.begin(), crash.end(), [](const auto& c) { return c.has_value(); })) {
    std::vector<std::size_t> basis;
    for (const auto& c : crash) basis.push_back(*c);
    solver.set_basis(basis);
  }
  LpResult<Scalar> result;
  result.status = solver.solve();
  if (result.status != LpStatus::kOptimal) return result;
  Vector<Scalar> y = solver.primal();
  result.x = shift;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (const auto& p : pieces[static_cast<std::size_t>(j)]) {
      result.x(j) += Scalar(p.sign) * y(static_cast<Eigen::Index>(p.col));
    }
  }
  result.value = lp.objective.dot(result.x);
  return result;
}

}  // namespace mechkit

#endif  // MECHKIT_LP_HPP
