#ifndef MECHKIT_HARDNESS_HPP
#define MECHKIT_HARDNESS_HPP

#include <optional>
#include <vector>

#include "mechkit/revtheory.hpp"

namespace mechkit {

/**
 * Planted monotone submodular family on items {1..n}. Subsets are bitmasks
 * with item j at bit j-1. f_i(S) = f0(S) = 2n|S| - |S|^2 except on planted
 * S_j with j <= i, where f_i(S_j) = f0(S_j) - 1 + j/(2i).
 */
struct PlantedFamily {
  int n = 0;
  std::vector<OutcomeId> planted;
  /** Test hook: when set, planted hits get f0 + corrupt_bonus instead. */
  std::optional<Rational> corrupt_bonus;

  int k() const { return static_cast<int>(planted.size()); }
};

/** Validates distinctness, size ordering and k <= 2^n. */
PlantedFamily planted_family(int n, std::vector<OutcomeId> planted);
/** k distinct uniformly random subsets, sorted by size then rank. */
PlantedFamily random_planted_family(int n, int k, std::uint64_t seed);

Rational base_value(int n, OutcomeId S);
/** f_i(S); i = 0 gives f0. */
Rational value_oracle(const PlantedFamily& fam, int i, OutcomeId S);

/** 1-based rank in the size-then-lexicographic order of subsets. */
std::uint64_t subset_rank(int n, OutcomeId S);
OutcomeId subset_unrank(int n, std::uint64_t r);

/** argmax_S f_i(S) - sum_{j in S} p_j, ties to the smallest rank. */
OutcomeId demand_oracle(const PlantedFamily& fam, int i, const std::vector<Rational>& prices);
/** The same by enumerating all subsets. */
OutcomeId demand_by_enumeration(const PlantedFamily& fam, int i, const std::vector<Rational>& prices);

struct SubmodularityReport {
  std::size_t checked = 0;
  /** (X, Y, x) with f(X + x) - f(X) < f(Y + x) - f(Y). */
  std::vector<std::tuple<OutcomeId, OutcomeId, int>> diminishing_violations;
  /** (S, x) with f(S + x) < f(S). */
  std::vector<std::pair<OutcomeId, int>> monotone_violations;
  bool ok() const { return diminishing_violations.empty() && monotone_violations.empty(); }
};

enum class CheckMode { kExhaustive, kRandom };

SubmodularityReport submodularity_test(const PlantedFamily& fam, int i, CheckMode mode, std::size_t trials = 0,
                                       std::uint64_t seed = 0);

/** (S_{i+1}, 1/2) for 1 <= i <= k-1. */
std::pair<OutcomeId, Rational> planted_optimum(const PlantedFamily& fam, int i);

Valuation planted_valuation(const PlantedFamily& fam, int i);
/** f_1..f_k as V* elements over subset_lattice(n). */
std::vector<ValuationSum> planted_functions(const PlantedFamily& fam);

/** Q_i = (2kn)^{2i-2}. */
std::vector<Rational> hardness_multipliers(int n, int k);

/** Single-bidder MDMDP instance of the family; throws CertificationError if the check fails. */
ReducedMdmdp hard_mdmdp(const PlantedFamily& fam);

}  // namespace mechkit

#endif  // MECHKIT_HARDNESS_HPP
