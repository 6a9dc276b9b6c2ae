#ifndef MECHKIT_MAXWEIGHT_HPP
#define MECHKIT_MAXWEIGHT_HPP

#include <vector>

#include "mechkit/convexopt.hpp"
#include "mechkit/model.hpp"

namespace mechkit {

/**
 * A downward-closed family of subsets of an m-by-n grid. Sets are bitmasks
 * with cell (i,j) at bit i*n+j, matching OutcomeSpace::bipartite_grid.
 * Matroid families live on a single row (m = 1).
 */
struct SetFamily {
  enum class Kind { kBipartiteMatching, kUniformMatroid, kPartitionMatroid, kExplicit };

  Kind kind = Kind::kBipartiteMatching;
  int rows = 1;
  int cols = 0;
  int rank = 0;
  std::vector<int> block;       // partition matroid: block index of each element
  std::vector<int> capacities;  // partition matroid: capacity of each block
  std::vector<OutcomeId> sets;  // explicit family; the empty set is always a member

  static SetFamily matching(int m, int n);
  static SetFamily uniform_matroid(int ground, int rank);
  static SetFamily partition_matroid(std::vector<int> block, std::vector<int> capacities);
  static SetFamily explicit_family(int m, int n, std::vector<OutcomeId> sets);

  bool contains(OutcomeId s) const;
  std::string name() const;
  /** The family as an outcome space over the same grid. */
  OutcomeSpace space() const;
};

struct MaxWeightOracle {
  SetFamily family;
  Rational alpha{1};
};

/** sum of weights(i,j) over the cells of s. */
Rational set_weight(const MatrixQ& weights, OutcomeId s, int cols);

/**
 * A maximum-weight member of the family. Negative-weight cells are never
 * selected; ties go to the lower element index.
 */
OutcomeId max_weight(const MatrixQ& weights, const MaxWeightOracle& oracle);

/** Exact assignment by the Hungarian method on max(w, 0). */
OutcomeId max_weight_matching(const MatrixQ& weights);

/** Indicator vector of s, flattened row-major. */
VectorQ indicator(OutcomeId s, int rows, int cols);

/** The oracle as a direction oracle over flattened marginal space. */
DirectionOracle marginal_direction_oracle(const MaxWeightOracle& oracle);

}  // namespace mechkit

#endif  // MECHKIT_MAXWEIGHT_HPP
