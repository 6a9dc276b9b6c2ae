#ifndef MECHKIT_BRUTE_FORCE_HPP
#define MECHKIT_BRUTE_FORCE_HPP

#include "mechkit/model.hpp"

namespace mechkit {

struct BruteForceResult {
  /** Optimal expected objective (revenue for revenue objectives). */
  Rational value{0};
  /** Implicit form of an optimal mechanism; carries pi_O unless the objective is revenue. */
  ImplicitForm implicit;
  /** Allocation of each profile, in TypeSpace::profiles() order. */
  std::vector<Distribution> allocations;
};

/**
 * Dense LP with one allocation variable per (profile, outcome), per-profile
 * prices in [0, max(1, largest value)] and all BIC and IR rows, solved in
 * exact arithmetic. `alpha` scales the allocation simplex (alpha = 1/2
 * optimises over the half-scaled allocation region).
 */
BruteForceResult brute_force_mechanism(const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj,
                                       const Rational& alpha = Rational(1), std::size_t limit = 1000000);

}  // namespace mechkit

#endif  // MECHKIT_BRUTE_FORCE_HPP
