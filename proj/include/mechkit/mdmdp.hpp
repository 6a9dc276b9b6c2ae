#ifndef MECHKIT_MDMDP_HPP
#define MECHKIT_MDMDP_HPP

#include <map>
#include <optional>
#include <vector>

#include "mechkit/convexopt.hpp"
#include "mechkit/sadp.hpp"

namespace mechkit {

/**
 * A finite distribution over complete type profiles, stored as distinct
 * profiles with weights summing to 1. A sample of M profiles becomes its
 * empirical distribution; the true prior is the special case D' = D.
 */
struct SurrogatePrior {
  std::vector<std::vector<int>> profiles;
  std::vector<Rational> weights;
  std::size_t sample_size = 0;  // M, or 0 for the exact prior

  /** Weight of bidder i having type t. */
  Rational marginal(int i, int t) const;
  /** Total weight of profiles that agree with q off coordinate i. */
  Rational others_weight(const std::vector<int>& q, int i) const;
  /** Weight of profile q itself. */
  Rational weight(const std::vector<int>& q) const;

  /** Every profile obtained by replacing one bidder's type, with its weights. */
  struct Substituted {
    std::vector<int> profile;
    ProfileWeights weights;
  };
  std::vector<Substituted> substituted(const TypeSpace& ts) const;
};

SurrogatePrior exact_prior(const TypeSpace& ts);
SurrogatePrior sample_surrogate(const TypeSpace& ts, std::size_t M, std::uint64_t seed);

/** max(1000, 50 * sum_i |T_i| * ceil(1/eps^2)). */
std::size_t default_surrogate_size(const TypeSpace& ts, const Rational& eps);

/** Per-profile SADP instance of a direction under the surrogate weights. */
SadpInstance surrogate_instance(const DirectionVector& w, const std::vector<int>& q, const ProfileWeights& weights,
                                const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj);

/**
 * Implicit form of the mechanism that runs G' on the virtual transform of w,
 * evaluated under the surrogate prior. Under a revenue objective only the
 * allocation block is meaningful; pi_O is 0 whenever w_O < 0.
 */
ImplicitForm interim_form_of_direction(const DirectionVector& w, const SurrogatePrior& prior, const SadpOracle& G,
                                       const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj);

/** A group of implicit-form coordinates whose feasible region has its own WSO. */
struct LpBlock {
  std::vector<Eigen::Index> coords;
  std::string name;
};

/**
 * The LP of Fig. 1 (revenue) or Fig. 3 (general) as an oracle LP over the
 * layout coordinates, with BIC and IR rows explicit and the feasibility
 * region split into WSO-governed blocks.
 */
struct MechanismLp {
  Layout layout;
  OracleLp lp;
  std::vector<LpBlock> blocks;
  std::size_t bic_rows = 0;
  std::size_t ir_rows = 0;

  Eigen::Index variables() const { return layout.dim(); }
};

MechanismLp build_revenue_lp(const TypeSpace& ts, const SurrogatePrior& prior);
MechanismLp build_general_lp(const TypeSpace& ts, const ObjectiveSpec& obj);

struct BlueprintBlock {
  LpBlock block;
  std::vector<DirectionVector> directions;
  std::vector<Rational> coefficients;
};

struct MechanismBlueprint {
  Layout layout;
  ObjectiveSpec objective;
  std::vector<BlueprintBlock> blocks;
  /** interim_prices[i][t]. */
  std::vector<std::vector<Rational>> interim_prices;
  SurrogatePrior prior;
  std::string oracle_name;
  Rational alpha{1};
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  Rational scale{1};
};

struct AuditReport {
  Rational max_bic_regret{0};
  Rational max_ir_violation{0};
  /** (i, t, t') -> regret; IR rows use t' = -1. */
  std::map<std::tuple<int, int, int>, Rational> regrets;
  bool passed = true;
};

AuditReport audit_epsilon_bic(const ImplicitForm& f, const Rational& eps);

enum class LpEngine { kCuttingPlane, kEllipsoid };

struct MdmdpOptions {
  Rational epsilon{1, 100};
  /** Use D' = D instead of sampling. */
  bool exact_prior = true;
  /** Surrogate size M when sampling; 0 selects default_surrogate_size. */
  std::size_t surrogate_size = 0;
  std::size_t trials = 0;  // 0 derives from epsilon
  std::uint64_t seed = 0;
  LpEngine engine = LpEngine::kCuttingPlane;
  WsoOptions wso;
  EllipsoidOptions ellipsoid;
};

struct MdmdpResult {
  MechanismBlueprint blueprint;
  /** LP optimum in normalised scale. */
  ImplicitForm lp_solution;
  /** Implicit form replayed from the blueprint (normalised scale). */
  ImplicitForm implicit;
  AuditReport audit;
  Rational lp_value{0};
  /** Objective of the replayed mechanism, normalised and original scale. */
  Rational objective{0};
  Rational objective_original{0};
  std::size_t iterations = 0;
  std::size_t oracle_calls = 0;
};

/** Objective of an implicit form under the surrogate prior. */
Rational implicit_objective(const ImplicitForm& f, const ObjectiveSpec& obj, const SurrogatePrior& prior);

/**
 * Algorithms 1 and 2. Instances with values above 1 are rescaled first;
 * the blueprint records the factor.
 */
MdmdpResult solve_mdmdp(const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj, const SadpOracle& G,
                        const MdmdpOptions& opt = {});

/** Implicit form implied by a blueprint, by replaying every direction. */
ImplicitForm replay_blueprint(const MechanismBlueprint& b, const TypeSpace& ts, const OutcomeSpace& os,
                              const SadpOracle& G);

struct MechanismOutcome {
  OutcomeId outcome = 0;
  std::vector<Rational> prices;
  std::size_t direction = 0;
};

/** One run of the mechanism on a reported profile. Prices are in original scale. */
MechanismOutcome run_mechanism(const MechanismBlueprint& b, const std::vector<int>& profile, const TypeSpace& ts,
                               const OutcomeSpace& os, const SadpOracle& G, std::uint64_t seed);

/** The derandomized oracle used by a solve, from its recorded trials and seed. */
SadpOracle blueprint_oracle(const MechanismBlueprint& b, const SadpOracle& G);

}  // namespace mechkit

#endif  // MECHKIT_MDMDP_HPP
