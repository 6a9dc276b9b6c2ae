#ifndef MECHKIT_MODEL_HPP
#define MECHKIT_MODEL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mechkit/errors.hpp"
#include "mechkit/rational.hpp"

namespace mechkit {

/**
 * Outcome identifier. Explicit spaces number their outcomes 1..n and
 * reserve 0 for the null outcome; lattice and grid spaces use the bitmask of
 * the chosen items or cells, so the empty set (0) is again the null outcome.
 */
using OutcomeId = std::uint64_t;

/** A distribution over outcomes, sorted by id with positive weights. */
using Distribution = std::vector<std::pair<OutcomeId, Rational>>;

Distribution point_mass(OutcomeId x);
/** Merges duplicate ids, drops zero weights and sorts by id. */
Distribution canonical(Distribution d);
/** c1*d1 + c2*d2 as a canonical distribution. */
Distribution mix(const Distribution& d1, const Rational& c1, const Distribution& d2, const Rational& c2);

class OutcomeSpace {
 public:
  enum class Kind { kExplicit, kSubsetLattice, kBipartiteGrid };
  using Feasibility = std::function<bool(OutcomeId)>;

  /** Explicit outcomes labelled by `labels`; the null outcome is implicit. */
  static OutcomeSpace explicit_outcomes(std::vector<std::string> labels);
  /** All subsets of items {1..n}. */
  static OutcomeSpace subset_lattice(int n);
  /** Subsets of the m-by-n grid accepted by `feasible` (cell (i,j) is bit i*n+j). */
  static OutcomeSpace bipartite_grid(int m, int n, Feasibility feasible, std::string family);
  /** Matchings of the m-by-n grid. */
  static OutcomeSpace matchings(int m, int n);

  Kind kind() const { return kind_; }
  int items() const { return n_; }
  int rows() const { return m_; }
  const std::string& family() const { return family_; }
  const std::vector<std::string>& labels() const { return labels_; }

  bool contains(OutcomeId x) const;
  /** Number of bits in an outcome index. */
  unsigned index_bits() const;
  /** Every outcome, null first, in increasing id order; throws SizeError past `limit`. */
  std::vector<OutcomeId> enumerate(std::size_t limit = std::size_t{1} << 20) const;
  /** Explicit label lookup; throws ValidationError for unknown labels. */
  OutcomeId id_of(const std::string& label) const;
  std::string label_of(OutcomeId x) const;

 private:
  Kind kind_ = Kind::kExplicit;
  int m_ = 1;
  int n_ = 0;
  std::vector<std::string> labels_;
  Feasibility feasible_;
  std::string family_;
};

/**
 * A bidder type: a non-negative function on outcomes. Copies share the
 * underlying representation, which is immutable.
 */
class Valuation {
 public:
  enum class Kind { kTable, kAdditive, kOracle };
  using Evaluator = std::function<Rational(OutcomeId)>;

  Valuation();
  static Valuation table(std::map<OutcomeId, Rational> values);
  /** v(i,j) is the value of grid cell (i,j); lattice spaces use one row. */
  static Valuation additive(MatrixQ v);
  /** External evaluator with a declared upper bound on its values. */
  static Valuation oracle(Evaluator f, Rational bound, std::string name = "oracle");

  Kind kind() const;
  Rational operator()(OutcomeId x) const;
  Rational expect(const Distribution& d) const;

  const std::map<OutcomeId, Rational>& table_values() const;
  const MatrixQ& additive_values() const;
  const Rational& declared_bound() const;
  const std::string& name() const;

  /** max over the space (exact for enumerable spaces, else a valid bound). */
  Rational max_value(const OutcomeSpace& space) const;
  /** This valuation multiplied by a non-negative rational. */
  Valuation scaled(const Rational& c) const;

 private:
  struct Impl;
  explicit Valuation(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/** An element of V*: a sparse non-negative combination of valuations. */
struct ValuationSum {
  std::vector<std::pair<Rational, Valuation>> terms;

  Rational operator()(OutcomeId x) const;
  Rational expect(const Distribution& d) const;
  bool empty() const { return terms.empty(); }
  void add(const Rational& c, const Valuation& v);
  /** Additive matrix of the sum if every term is additive. */
  std::optional<MatrixQ> additive(Eigen::Index rows, Eigen::Index cols) const;
};

struct BidderTypes {
  std::vector<Valuation> types;
  std::vector<Rational> prior;
};

/** Independent per-bidder finite type spaces with rational priors. */
class TypeSpace {
 public:
  TypeSpace() = default;
  explicit TypeSpace(std::vector<BidderTypes> bidders) : bidders_(std::move(bidders)) {}

  int bidders() const { return static_cast<int>(bidders_.size()); }
  int types(int i) const { return static_cast<int>(bidders_[static_cast<std::size_t>(i)].types.size()); }
  const Valuation& type(int i, int t) const { return bidders_[i].types[t]; }
  const Rational& prior(int i, int t) const { return bidders_[i].prior[t]; }
  const BidderTypes& bidder(int i) const { return bidders_[i]; }
  std::vector<int> type_counts() const;

  /** Number of type profiles; throws SizeError past `limit`. */
  std::size_t profile_count(std::size_t limit = std::size_t{1} << 24) const;
  /** All profiles in lexicographic order of type indices. */
  std::vector<std::vector<int>> profiles(std::size_t limit = std::size_t{1} << 24) const;
  Rational profile_probability(const std::vector<int>& profile) const;

 private:
  std::vector<BidderTypes> bidders_;
};

/**
 * One linear piece of a concave objective, evaluated on a profile of types,
 * an outcome distribution and a price vector:
 *   sum_i bidder[i]*t_i(X) + sum_i price[i]*P_i + E[outcome(X)] + constant.
 */
struct LinearPiece {
  std::vector<Rational> bidder;
  std::vector<Rational> price;
  std::map<OutcomeId, Rational> outcome;
  Rational constant{0};
};

enum class ObjectiveKind { kRevenue, kAllocationOnly, kGeneral };

/** A concave objective given as the minimum of linear pieces. */
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kRevenue;
  std::string name = "revenue";
  std::vector<LinearPiece> pieces;

  static ObjectiveSpec revenue(int bidders);
  static ObjectiveSpec welfare(int bidders);
  static ObjectiveSpec fmmf(int bidders);
  static ObjectiveSpec general(std::vector<LinearPiece> pieces, std::string name = "general");

  bool allocation_only() const;
  bool price_only() const;

  /** Objective value for reported types, an allocation and prices. */
  Rational evaluate(const std::vector<Valuation>& types, const Distribution& X,
                    const std::vector<Rational>& prices) const;
};

/**
 * Index layout of an implicit form: [pi_O] then pi_i(t,t') row-major per
 * bidder, then P_i(t).
 */
class Layout {
 public:
  Layout() = default;
  Layout(std::vector<int> type_counts, bool with_objective);

  bool has_objective() const { return with_objective_; }
  const std::vector<int>& type_counts() const { return counts_; }
  int bidders() const { return static_cast<int>(counts_.size()); }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index objective_index() const;
  Eigen::Index pi_index(int i, int t, int tp) const;
  Eigen::Index price_index(int i, int t) const;
  Eigen::Index pi_begin() const { return with_objective_ ? 1 : 0; }
  Eigen::Index pi_size() const { return pi_size_; }
  Eigen::Index price_begin() const { return pi_begin() + pi_size_; }
  Eigen::Index price_size() const { return price_size_; }

  bool operator==(const Layout& o) const {
    return counts_ == o.counts_ && with_objective_ == o.with_objective_;
  }
  bool operator!=(const Layout& o) const { return !(*this == o); }

 private:
  std::vector<int> counts_;
  bool with_objective_ = false;
  std::vector<Eigen::Index> pi_offset_;
  std::vector<Eigen::Index> price_offset_;
  Eigen::Index pi_size_ = 0;
  Eigen::Index price_size_ = 0;
  Eigen::Index dim_ = 0;
};

/** Reduced description of a mechanism over a Layout. */
struct ImplicitForm {
  Layout layout;
  VectorQ values;

  explicit ImplicitForm(Layout l = {}) : layout(std::move(l)), values(VectorQ::Zero(layout.dim())) {}

  Rational& pi(int i, int t, int tp) { return values(layout.pi_index(i, t, tp)); }
  const Rational& pi(int i, int t, int tp) const { return values(layout.pi_index(i, t, tp)); }
  Rational& price(int i, int t) { return values(layout.price_index(i, t)); }
  const Rational& price(int i, int t) const { return values(layout.price_index(i, t)); }
  Rational& objective() { return values(layout.objective_index()); }
  const Rational& objective() const { return values(layout.objective_index()); }
};

/** LP direction over the same layout as ImplicitForm. */
struct DirectionVector {
  Layout layout;
  VectorQ values;

  explicit DirectionVector(Layout l = {}) : layout(std::move(l)), values(VectorQ::Zero(layout.dim())) {}

  const Rational& pi(int i, int t, int tp) const { return values(layout.pi_index(i, t, tp)); }
  const Rational& price(int i, int t) const { return values(layout.price_index(i, t)); }
  Rational objective() const { return layout.has_objective() ? values(layout.objective_index()) : Rational(0); }
  /** max(w_O, 0). */
  Rational clamped_objective() const;
};

Rational implicit_form_dot(const ImplicitForm& f, const DirectionVector& w);

/** BIC row slack pi(t,t) - P(t) - pi(t,t') + P(t') (negative means violated). */
Rational bic_slack(const ImplicitForm& f, int i, int t, int tp);
/** IR slack pi(t,t) - P(t). */
Rational ir_slack(const ImplicitForm& f, int i, int t);
bool satisfies_bic_ir(const ImplicitForm& f);
/** Multiplies every coordinate by alpha. */
ImplicitForm scale(const ImplicitForm& f, const Rational& alpha);

struct Violation {
  std::string location;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate_instance(const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj);

/** Divides every valuation by the global maximum M when M > 1. */
std::pair<TypeSpace, Rational> rescale_to_unit(const TypeSpace& ts, const OutcomeSpace& os);

}  // namespace mechkit

#endif  // MECHKIT_MODEL_HPP
