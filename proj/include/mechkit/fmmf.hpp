#ifndef MECHKIT_FMMF_HPP
#define MECHKIT_FMMF_HPP

#include <vector>

#include "mechkit/maxweight.hpp"
#include "mechkit/sadp.hpp"

namespace mechkit {

/** Marginals x(i,j) together with a certified mixture of family sets. */
struct MarginalVector {
  MatrixQ x;
  std::vector<std::pair<OutcomeId, Rational>> decomposition;

  /** Marginals implied by the stored decomposition. */
  MatrixQ reconstruct() const;
};

/** min_i sum_{l,j} gs[i](l,j) * x(l,j). */
Rational fmmf_value(const std::vector<MatrixQ>& gs, const MatrixQ& x);

/**
 * LP over (x, O) with x flattened row-major and O last:
 *   maximise c0*O + sum (f - f')(l,j) x(l,j)
 *   s.t. O <= g_i . x for every i, 0 <= x <= 1, 0 <= O <= max_i sum g_i,
 * with membership of x in the family polytope left to a separation oracle.
 */
struct FmmfLp {
  int rows = 0;
  int cols = 0;
  OracleLp lp;

  Eigen::Index objective_variable() const { return static_cast<Eigen::Index>(rows) * cols; }
};

FmmfLp build_fmmf_lp(const std::vector<MatrixQ>& gs, const MatrixQ& f, const MatrixQ& fprime, const Rational& c0);

struct FmmfResult {
  SadpSolution solution;
  MarginalVector marginals;
  Rational lp_value{0};
  std::size_t iterations = 0;
  std::size_t oracle_calls = 0;
};

/**
 * SADP with an FMMF objective over additive functions: f_3.. are ignored,
 * the Fig. 4 LP is solved over the WSO of the max-weight oracle and the
 * optimum is returned as a mixture of family sets.
 */
FmmfResult solve_sadp_fmmf(const SadpInstance& inst, const MaxWeightOracle& G, const WsoOptions& opt = {});

/** Additive matrices of an instance; throws ValidationError for other representations. */
std::vector<MatrixQ> additive_matrices(const std::vector<ValuationSum>& fs, int rows, int cols);

/** solve_sadp_fmmf packaged as an SADP oracle. */
SadpOracle fmmf_sadp_oracle(const MaxWeightOracle& G, const WsoOptions& opt = {});

}  // namespace mechkit

#endif  // MECHKIT_FMMF_HPP
