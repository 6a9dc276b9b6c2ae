#ifndef MECHKIT_SADP_HPP
#define MECHKIT_SADP_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mechkit/model.hpp"
#include "mechkit/random.hpp"

namespace mechkit {

/**
 * Solve-any-differences instance. The revenue form carries only fs; the
 * general form adds gs (the reported types fed to the objective), cs (price
 * weights) and c0 (objective weight).
 */
struct SadpInstance {
  std::vector<ValuationSum> fs;
  std::optional<std::vector<Valuation>> gs;
  std::optional<std::vector<Rational>> cs;
  std::optional<Rational> c0;
  ObjectiveSpec objective;
  OutcomeSpace space;

  bool general() const { return gs.has_value(); }
  int bidders() const { return gs ? static_cast<int>(gs->size()) : 0; }
};

struct SadpSolution {
  Distribution allocation;
  std::optional<std::vector<Rational>> prices;
  std::optional<int> achieved_index;
};

/** A black-box SADP solver; randomised solvers draw from the supplied stream. */
struct SadpOracle {
  using Solver = std::function<SadpSolution(const SadpInstance&, CounterRng&)>;
  Solver solver;
  Rational alpha{1};
  bool randomized = false;
  std::string name = "exact";

  SadpSolution operator()(const SadpInstance& inst) const;
  SadpSolution operator()(const SadpInstance& inst, CounterRng& rng) const { return solver(inst, rng); }
};

/** (f_j - f_{j+1})(X) for 1-based j. */
Rational difference(const SadpInstance& inst, int j, const Distribution& X);

/**
 * Objective of a solution: f_1 - f_2 plus, for the general form,
 * c0*O(gs, X, P) + sum_i c_i P_i.
 */
Rational instance_value(const SadpInstance& inst, const SadpSolution& sol);

/** Exact solver by outcome enumeration (an LP for multi-piece objectives). */
SadpSolution brute_force_sadp(const SadpInstance& inst, std::size_t limit = std::size_t{1} << 20);

/**
 * Per-profile weights turning an LP direction into an SADP instance:
 * bidder i's virtual-welfare and price terms are multiplied by rho[i] and
 * the objective term by omega. With the true prior rho[i] = 1/Pr[t'_i] and
 * omega = 1.
 */
struct ProfileWeights {
  std::vector<Rational> rho;
  Rational omega{1};
};

ProfileWeights prior_weights(const TypeSpace& ts, const std::vector<int>& profile);

SadpInstance virtual_transform_revenue(const DirectionVector& w, const std::vector<int>& profile,
                                       const TypeSpace& ts, const OutcomeSpace& os);
SadpInstance virtual_transform_revenue(const DirectionVector& w, const std::vector<int>& profile,
                                       const TypeSpace& ts, const OutcomeSpace& os, const ProfileWeights& weights);

SadpInstance virtual_transform_general(const DirectionVector& w, const std::vector<int>& profile,
                                       const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj);
SadpInstance virtual_transform_general(const DirectionVector& w, const std::vector<int>& profile,
                                       const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj,
                                       const ProfileWeights& weights);

/** Canonical text of an instance, used for digests and replay. */
std::string instance_digest_text(const SadpInstance& inst);
std::uint64_t instance_digest(const SadpInstance& inst);

/**
 * G' runs G `trials` times on a stream keyed by (seed, instance digest) and
 * keeps the best solution; deterministic oracles are returned unchanged.
 */
SadpOracle derandomize(const SadpOracle& G, std::size_t trials, std::uint64_t seed);

/** Best ratio over j of achieved to optimal difference (general form: value ratio). */
Rational certify_ratio(const SadpInstance& inst, const SadpSolution& sol, const SadpSolution& exact);

/** brute_force_sadp as an oracle (alpha = 1). */
SadpOracle exact_sadp_oracle();
/** Half of the exact optimiser mixed with the null outcome (alpha = 1/2). */
SadpOracle halved_sadp_oracle();

}  // namespace mechkit

#endif  // MECHKIT_SADP_HPP
