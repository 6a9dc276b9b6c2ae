#ifndef MECHKIT_REVTHEORY_HPP
#define MECHKIT_REVTHEORY_HPP

#include <optional>
#include <vector>

#include "mechkit/sadp.hpp"

namespace mechkit {

/** Single-bidder menu: type t_j receives allocation X_j and has probability q_j. */
struct OrderedMenu {
  std::vector<Valuation> types;
  std::vector<Distribution> allocations;
  std::vector<Rational> probabilities;
};

/** Result of comparing a claimed matching against a maximum-weight one. */
struct MatchingCheck {
  bool ok = true;
  /** assignment[r] = column matched to row r (-1 when unmatched). */
  std::vector<int> assignment;
  Rational optimum{0};
  Rational claimed{0};
};

/** Identity assignment of types to allocations is welfare maximising among perfect assignments (ties pass). */
MatchingCheck cyclic_monotone_check(const std::vector<Valuation>& types, const std::vector<Distribution>& allocations);

struct WindowCheck {
  int i = 0;
  int j = 0;
  MatchingCheck check;
};

struct CompatibilityReport {
  bool ok = true;
  MatchingCheck cyclic;
  std::vector<WindowCheck> windows;
};

/**
 * Cyclic monotonicity plus every shifted window: for 0 <= i < j <= k, types
 * t_{i+1..j} against allocations X_{i..j-1} must be matched t_{l+1} -> X_l,
 * where X_0 is the null allocation.
 */
CompatibilityReport compatible_check(const std::vector<Valuation>& types, const std::vector<Distribution>& allocations);

/** p_1 = t_1(X_1), p_j = t_j(X_j) - t_j(X_{j-1}) + p_{j-1}. */
std::vector<Rational> payment_chain(const std::vector<Valuation>& types, const std::vector<Distribution>& allocations);

/** sum_j q_j p_j. */
Rational menu_revenue(const OrderedMenu& menu, const std::vector<Rational>& prices);

/** sum_l (sum_{j >= l} q_j) (t_l(X_l) - t_l(X_{l-1})), with X_0 null. */
Rational rev_upper_bound(const OrderedMenu& menu);

struct BalanceReport {
  /** Smallest D; nullopt when no finite D exists. */
  std::optional<Rational> D;
  /** X*_l maximising f_l - f_{l+1} (f_{k+1} = 0). */
  std::vector<Distribution> maximizers;
  /** f_l(X*_l) - f_{l+1}(X*_l) for l < k. */
  std::vector<Rational> differences;
  /** f_k(X*_k). */
  Rational top{0};
};

BalanceReport d_balance(const std::vector<ValuationSum>& fs, const OutcomeSpace& space);

/** Multipliers with the compatibility transcript that certifies them. */
struct CompatCertificate {
  std::vector<Rational> Q;
  std::vector<Distribution> allocations;
  CompatibilityReport report;
  /** Largest bit size among the multipliers. */
  std::size_t bits = 0;
};

/** Scaled types Q_j f_j as valuations. */
std::vector<Valuation> scaled_types(const std::vector<ValuationSum>& fs, const std::vector<Rational>& Q,
                                    const OutcomeSpace& space);

/** Runs compatible_check of (Q_j f_j) against the difference maximisers. */
CompatCertificate certify_compatibility(const std::vector<ValuationSum>& fs, const OutcomeSpace& space,
                                        const std::vector<Rational>& Q);

/** q_j = 1/Q_j - 1/Q_{j+1}, q_k = 1/Q_k. */
std::vector<Rational> reduction_prior(const std::vector<Rational>& Q);

struct ReducedMdmdp {
  TypeSpace types;
  OutcomeSpace space;
  CompatCertificate certificate;
};

/** Single-bidder MDMDP instance of a certified SADP instance; throws CertificationError. */
ReducedMdmdp sadp_to_mdmdp(const std::vector<ValuationSum>& fs, const OutcomeSpace& space,
                           const CompatCertificate& certificate);

/** alpha - (1 - alpha) D / (k - 1). */
Rational approximation_bound(const Rational& alpha, const Rational& D, int k);

struct Extraction {
  SadpSolution solution;
  Rational ratio_bound{0};
  std::vector<Rational> differences;
};

/** Best of X_1..X_k on f_l - f_{l+1}, with the guaranteed ratio. */
Extraction extract_sadp_solution(const std::vector<Distribution>& allocations, const std::vector<ValuationSum>& fs,
                                 const Rational& alpha_mech, const Rational& D, int k);

}  // namespace mechkit

#endif  // MECHKIT_REVTHEORY_HPP
