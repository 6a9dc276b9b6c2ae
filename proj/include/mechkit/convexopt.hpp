#ifndef MECHKIT_CONVEXOPT_HPP
#define MECHKIT_CONVEXOPT_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mechkit/ellipsoid.hpp"
#include "mechkit/rational.hpp"

namespace mechkit {

/**
 * An alpha-approximate linear optimisation oracle over a polytope P that
 * contains the origin: for w in [-1,1]^d it returns a point A(w) of P with
 * A(w).w >= alpha * max_{x in P} x.w. Must be deterministic.
 */
struct DirectionOracle {
  Eigen::Index dim = 0;
  Rational alpha{1};
  unsigned bit_bound = 64;
  std::function<VectorQ(const VectorQ&)> evaluate;

  /** Evaluates with the convention A(0) := A(e_1). */
  VectorQ operator()(const VectorQ& w) const;
};

struct WsoVerdict {
  bool yes = false;
  // Yes: x ~= sum_j coefficients[j] * points[j], points[j] = A(directions[j]).
  std::vector<VectorQ> directions;
  std::vector<VectorQ> points;
  std::vector<Rational> coefficients;
  // No: a halfspace containing alpha*P and excluding x.
  Halfspace separating;

  VectorQ reconstruct() const;
};

/** Plain-text oracle log, one line per call. */
class Transcript {
 public:
  explicit Transcript(bool enabled = false, std::size_t keep = 2000) : enabled_(enabled), keep_(keep) {}
  void record(const std::string& line);
  bool enabled() const { return enabled_; }
  const std::vector<std::string>& lines() const { return lines_; }
  std::string str() const;
  std::size_t count() const { return count_; }

 private:
  bool enabled_;
  std::size_t keep_;
  std::size_t count_ = 0;
  std::vector<std::string> lines_;
};

std::string format_vector(const VectorQ& v);

enum class WsoSearch {
  /** Exact column generation on the L1 projection LP (the dual of region D). */
  kColumnGeneration,
  /** Ellipsoid method over region D in (w, z) space. */
  kEllipsoid,
};

struct WsoOptions {
  Rational delta = pow2(-64);
  Rational tol_decomp = pow2(-30);
  WsoSearch search = WsoSearch::kColumnGeneration;
  /** z ranges over [-z_bound, z_bound]; 0 selects the dimension d. */
  Rational z_bound{0};
  unsigned precision_bits = 256;
  std::size_t max_oracle_calls = 100000;
  bool transcript = false;
};

/** Default delta = 2^-(d(b + l) + 16). */
Rational default_delta(Eigen::Index d, unsigned input_bits, unsigned oracle_bits);

/**
 * Weird separation oracle for alpha*P. Points returned by the direction
 * oracle are cached across queries; they are valid members of P whatever x
 * is being separated.
 */
namespace detail {
class ProjectionLp;
}

class WeirdSeparationOracle {
 public:
  WeirdSeparationOracle(DirectionOracle A, WsoOptions opt = {});
  ~WeirdSeparationOracle();
  WeirdSeparationOracle(WeirdSeparationOracle&&) noexcept;
  WeirdSeparationOracle& operator=(WeirdSeparationOracle&&) noexcept;

  WsoVerdict query(const VectorQ& x);

  Eigen::Index dim() const { return A_.dim; }
  const DirectionOracle& direction_oracle() const { return A_; }
  const std::vector<VectorQ>& points() const { return points_; }
  const std::vector<VectorQ>& directions() const { return directions_; }
  std::size_t oracle_calls() const { return oracle_calls_; }
  const Transcript& transcript() const { return transcript_; }
  const WsoOptions& options() const { return opt_; }

 private:
  std::size_t discover(const VectorQ& w);
  WsoVerdict query_column_generation(const VectorQ& x);
  WsoVerdict query_ellipsoid(const VectorQ& x);
  WsoVerdict yes_verdict(const VectorQ& x, const std::vector<std::size_t>& support,
                         const std::vector<Rational>& coefficients);
  WsoVerdict no_verdict(const VectorQ& x, VectorQ w, Rational z);

  DirectionOracle A_;
  WsoOptions opt_;
  std::vector<VectorQ> points_;
  std::vector<VectorQ> directions_;
  std::size_t oracle_calls_ = 0;
  std::size_t queries_ = 0;
  Transcript transcript_;
  /** Projection LP kept across column-generation queries for warm starts. */
  std::unique_ptr<detail::ProjectionLp> projection_;
  std::size_t projected_points_ = 0;
};

/** One-shot WSO query with a fresh point cache. */
WsoVerdict wso_query(const VectorQ& x, const DirectionOracle& A, const Rational& delta,
                     WsoSearch search = WsoSearch::kColumnGeneration);

/**
 * Convex coefficients c with |sum c_j points_j - x|_inf <= tol. Throws
 * PrecisionError when x is farther than tol from the hull.
 */
std::vector<Rational> decompose_convex(const VectorQ& x, const std::vector<VectorQ>& points,
                                       const Rational& tol = Rational(0));

/** Box-bounded LP whose remaining constraints come from a separation oracle. */
struct OracleLp {
  VectorQ objective;
  VectorQ lower;
  VectorQ upper;
  std::vector<Halfspace> rows;
};

struct OracleLpResult {
  VectorQ x;
  Rational value{0};
  std::size_t iterations = 0;
  std::vector<Halfspace> cuts;
};

/**
 * Kelley's cutting-plane method, solved through the LP dual so that each
 * cut is a new dual column and every re-solve is warm started.
 */
OracleLpResult maximize_cutting_plane(const OracleLp& lp, const SeparationOracle& oracle,
                                      std::size_t max_iterations = 100000);

/** The same LP by the sliding-objective ellipsoid method. */
OracleLpResult maximize_ellipsoid(const OracleLp& lp, const SeparationOracle& oracle,
                                  const EllipsoidOptions& opt, double log_min_volume);

}  // namespace mechkit

#endif  // MECHKIT_CONVEXOPT_HPP
