#include "mechkit/model.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace mechkit {

Distribution point_mass(OutcomeId x) { return {{x, Rational(1)}}; }

Distribution canonical(Distribution d) {
  std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Distribution out;
  for (auto& [x, p] : d) {
    if (!out.empty() && out.back().first == x) {
      out.back().second += p;
    } else {
      out.emplace_back(x, p);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const auto& e) { return e.second == 0; }),
            out.end());
  return out;
}

Distribution mix(const Distribution& d1, const Rational& c1, const Distribution& d2, const Rational& c2) {
  Distribution out;
  for (const auto& [x, p] : d1) out.emplace_back(x, c1 * p);
  for (const auto& [x, p] : d2) out.emplace_back(x, c2 * p);
  return canonical(std::move(out));
}

// ---------------------------------------------------------------- outcomes

OutcomeSpace OutcomeSpace::explicit_outcomes(std::vector<std::string> labels) {
  if (labels.empty()) throw ValidationError("explicit outcome list is empty");
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("explicit outcome list has duplicates");
  }
  OutcomeSpace s;
  s.kind_ = Kind::kExplicit;
  s.n_ = static_cast<int>(labels.size());
  s.labels_ = std::move(labels);
  s.family_ = "explicit";
  return s;
}

OutcomeSpace OutcomeSpace::subset_lattice(int n) {
  if (n < 0 || n > 63) throw ValidationError("subset lattice needs 0 <= n <= 63");
  OutcomeSpace s;
  s.kind_ = Kind::kSubsetLattice;
  s.n_ = n;
  s.family_ = "subsets";
  return s;
}

OutcomeSpace OutcomeSpace::bipartite_grid(int m, int n, Feasibility feasible, std::string family) {
  if (m < 1 || n < 1 || m * n > 63) throw ValidationError("grid needs 1 <= m*n <= 63");
  OutcomeSpace s;
  s.kind_ = Kind::kBipartiteGrid;
  s.m_ = m;
  s.n_ = n;
  s.feasible_ = std::move(feasible);
  s.family_ = std::move(family);
  return s;
}

OutcomeSpace OutcomeSpace::matchings(int m, int n) {
  auto feasible = [m, n](OutcomeId x) {
    for (int i = 0; i < m; ++i) {
      OutcomeId row = (x >> (i * n)) & ((OutcomeId{1} << n) - 1);
      if (std::popcount(row) > 1) return false;
    }
    for (int j = 0; j < n; ++j) {
      int c = 0;
      for (int i = 0; i < m; ++i) c += static_cast<int>((x >> (i * n + j)) & 1U);
      if (c > 1) return false;
    }
    return true;
  };
  return bipartite_grid(m, n, feasible, "matching");
}

bool OutcomeSpace::contains(OutcomeId x) const {
  switch (kind_) {
    case Kind::kExplicit:
      return x <= static_cast<OutcomeId>(n_);
    case Kind::kSubsetLattice:
      return n_ == 64 || x < (OutcomeId{1} << n_);
    case Kind::kBipartiteGrid:
      return x < (OutcomeId{1} << (m_ * n_)) && (!feasible_ || feasible_(x));
  }
  return false;
}

unsigned OutcomeSpace::index_bits() const {
  switch (kind_) {
    case Kind::kExplicit:
      return static_cast<unsigned>(std::bit_width(static_cast<OutcomeId>(n_)));
    case Kind::kSubsetLattice:
      return static_cast<unsigned>(n_);
    case Kind::kBipartiteGrid:
      return static_cast<unsigned>(m_ * n_);
  }
  return 0;
}

std::vector<OutcomeId> OutcomeSpace::enumerate(std::size_t limit) const {
  std::vector<OutcomeId> out;
  if (kind_ == Kind::kExplicit) {
    for (OutcomeId x = 0; x <= static_cast<OutcomeId>(n_); ++x) out.push_back(x);
    return out;
  }
  const int bits = kind_ == Kind::kSubsetLattice ? n_ : m_ * n_;
  if (bits > 40 || (std::size_t{1} << bits) > limit) {
    throw SizeError("outcome space too large to enumerate (" + std::to_string(bits) + " bits)");
  }
  for (OutcomeId x = 0; x < (OutcomeId{1} << bits); ++x) {
    if (contains(x)) out.push_back(x);
  }
  return out;
}

OutcomeId OutcomeSpace::id_of(const std::string& label) const {
  if (kind_ != Kind::kExplicit) throw ValidationError("labels exist only for explicit spaces");
  if (label == "null") return 0;
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ValidationError("unknown outcome \"" + label + "\"");
  return static_cast<OutcomeId>(it - labels_.begin()) + 1;
}

std::string OutcomeSpace::label_of(OutcomeId x) const {
  if (kind_ == Kind::kExplicit) {
    return x == 0 ? std::string("null") : labels_.at(static_cast<std::size_t>(x - 1));
  }
  return std::to_string(x);
}

// -------------------------------------------------------------- valuations

struct Valuation::Impl {
  Kind kind = Kind::kTable;
  std::map<OutcomeId, Rational> table;
  MatrixQ additive;
  Evaluator oracle;
  Rational bound{0};
  std::string name;
};

Valuation::Valuation() : impl_(std::make_shared<Impl>()) {}
Valuation::Valuation(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Valuation Valuation::table(std::map<OutcomeId, Rational> values) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kTable;
  for (auto& [x, v] : values) {
    if (v < 0) throw ValidationError("valuation has a negative value");
    if (v != 0) impl->table.emplace(x, v);
  }
  return Valuation(std::move(impl));
}

Valuation Valuation::additive(MatrixQ v) {
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (v(i, j) < 0) throw ValidationError("additive valuation has a negative entry");
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kAdditive;
  impl->additive = std::move(v);
  return Valuation(std::move(impl));
}

Valuation Valuation::oracle(Evaluator f, Rational bound, std::string name) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kOracle;
  impl->oracle = std::move(f);
  impl->bound = std::move(bound);
  impl->name = std::move(name);
  return Valuation(std::move(impl));
}

Valuation::Kind Valuation::kind() const { return impl_->kind; }

Rational Valuation::operator()(OutcomeId x) const {
  switch (impl_->kind) {
    case Kind::kTable: {
      auto it = impl_->table.find(x);
      return it == impl_->table.end() ? Rational(0) : it->second;
    }
    case Kind::kAdditive: {
      Rational s(0);
      const Eigen::Index cols = impl_->additive.cols();
      while (x != 0) {
        int bit = std::countr_zero(x);
        x &= x - 1;
        s += impl_->additive(bit / cols, bit % cols);
      }
      return s;
    }
    case Kind::kOracle:
      return impl_->oracle(x);
  }
  return Rational(0);
}

Rational Valuation::expect(const Distribution& d) const {
  Rational s(0);
  for (const auto& [x, p] : d) s += p * (*this)(x);
  return s;
}

const std::map<OutcomeId, Rational>& Valuation::table_values() const {
  if (impl_->kind != Kind::kTable) throw ValidationError("valuation is not table-backed");
  return impl_->table;
}

const MatrixQ& Valuation::additive_values() const {
  if (impl_->kind != Kind::kAdditive) throw ValidationError("valuation is not additive");
  return impl_->additive;
}

const Rational& Valuation::declared_bound() const { return impl_->bound; }
const std::string& Valuation::name() const { return impl_->name; }

Rational Valuation::max_value(const OutcomeSpace& space) const {
  switch (impl_->kind) {
    case Kind::kTable: {
      Rational m(0);
      for (const auto& [x, v] : impl_->table) m = std::max(m, v);
      return m;
    }
    case Kind::kAdditive: {
      try {
        Rational m(0);
        for (OutcomeId x : space.enumerate()) m = std::max(m, (*this)(x));
        return m;
      } catch (const SizeError&) {
        return impl_->additive.sum();
      }
    }
    case Kind::kOracle:
      return impl_->bound;
  }
  return Rational(0);
}

Valuation Valuation::scaled(const Rational& c) const {
  if (c < 0) throw ValidationError("negative scaling of a valuation");
  switch (impl_->kind) {
    case Kind::kTable: {
      std::map<OutcomeId, Rational> t;
      for (const auto& [x, v] : impl_->table) t.emplace(x, c * v);
      return table(std::move(t));
    }
    case Kind::kAdditive:
      return additive(impl_->additive * c);
    case Kind::kOracle: {
      auto inner = impl_->oracle;
      return oracle([inner, c](OutcomeId x) { return c * inner(x); }, c * impl_->bound, impl_->name);
    }
  }
  return *this;
}

Rational ValuationSum::operator()(OutcomeId x) const {
  Rational s(0);
  for (const auto& [c, v] : terms) s += c * v(x);
  return s;
}

Rational ValuationSum::expect(const Distribution& d) const {
  Rational s(0);
  for (const auto& [x, p] : d) s += p * (*this)(x);
  return s;
}

void ValuationSum::add(const Rational& c, const Valuation& v) {
  if (c < 0) throw ValidationError("V* combinations need non-negative coefficients");
  if (c != 0) terms.emplace_back(c, v);
}

std::optional<MatrixQ> ValuationSum::additive(Eigen::Index rows, Eigen::Index cols) const {
  MatrixQ m = MatrixQ::Zero(rows, cols);
  for (const auto& [c, v] : terms) {
    if (v.kind() != Valuation::Kind::kAdditive) return std::nullopt;
    const MatrixQ& a = v.additive_values();
    if (a.rows() != rows || a.cols() != cols) throw DimensionError("additive matrix shape mismatch");
    m += c * a;
  }
  return m;
}

// ------------------------------------------------------------- type spaces

std::vector<int> TypeSpace::type_counts() const {
  std::vector<int> c;
  for (const auto& b : bidders_) c.push_back(static_cast<int>(b.types.size()));
  return c;
}

std::size_t TypeSpace::profile_count(std::size_t limit) const {
  std::size_t n = 1;
  for (const auto& b : bidders_) {
    n *= b.types.size();
    if (n > limit) throw SizeError("type profile space exceeds enumeration limit");
  }
  return n;
}

std::vector<std::vector<int>> TypeSpace::profiles(std::size_t limit) const {
  const std::size_t total = profile_count(limit);
  std::vector<std::vector<int>> out;
  out.reserve(total);
  std::vector<int> p(bidders_.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    out.push_back(p);
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) {
      if (++p[static_cast<std::size_t>(i)] < types(i)) break;
      p[static_cast<std::size_t>(i)] = 0;
    }
  }
  return out;
}

Rational TypeSpace::profile_probability(const std::vector<int>& profile) const {
  Rational p(1);
  for (std::size_t i = 0; i < profile.size(); ++i) p *= bidders_[i].prior[static_cast<std::size_t>(profile[i])];
  return p;
}

// --------------------------------------------------------------- objectives

ObjectiveSpec ObjectiveSpec::revenue(int bidders) {
  ObjectiveSpec o;
  o.kind = ObjectiveKind::kRevenue;
  o.name = "revenue";
  LinearPiece p;
  p.bidder.assign(static_cast<std::size_t>(bidders), Rational(0));
  p.price.assign(static_cast<std::size_t>(bidders), Rational(1));
  o.pieces.push_back(std::move(p));
  return o;
}

ObjectiveSpec ObjectiveSpec::welfare(int bidders) {
  ObjectiveSpec o;
  o.kind = ObjectiveKind::kAllocationOnly;
  o.name = "welfare";
  LinearPiece p;
  p.bidder.assign(static_cast<std::size_t>(bidders), Rational(1));
  p.price.assign(static_cast<std::size_t>(bidders), Rational(0));
  o.pieces.push_back(std::move(p));
  return o;
}

ObjectiveSpec ObjectiveSpec::fmmf(int bidders) {
  ObjectiveSpec o;
  o.kind = ObjectiveKind::kAllocationOnly;
  o.name = "fmmf";
  for (int i = 0; i < bidders; ++i) {
    LinearPiece p;
    p.bidder.assign(static_cast<std::size_t>(bidders), Rational(0));
    p.bidder[static_cast<std::size_t>(i)] = Rational(1);
    p.price.assign(static_cast<std::size_t>(bidders), Rational(0));
    o.pieces.push_back(std::move(p));
  }
  return o;
}

ObjectiveSpec ObjectiveSpec::general(std::vector<LinearPiece> pieces, std::string name) {
  ObjectiveSpec o;
  o.pieces = std::move(pieces);
  o.name = std::move(name);
  o.kind = o.allocation_only() ? ObjectiveKind::kAllocationOnly : ObjectiveKind::kGeneral;
  return o;
}

bool ObjectiveSpec::allocation_only() const {
  for (const auto& p : pieces) {
    for (const auto& b : p.price) {
      if (b != 0) return false;
    }
  }
  return true;
}

bool ObjectiveSpec::price_only() const {
  for (const auto& p : pieces) {
    if (!p.outcome.empty()) return false;
    for (const auto& a : p.bidder) {
      if (a != 0) return false;
    }
  }
  return true;
}

Rational ObjectiveSpec::evaluate(const std::vector<Valuation>& types, const Distribution& X,
                                 const std::vector<Rational>& prices) const {
  std::optional<Rational> best;
  for (const auto& p : pieces) {
    Rational v = p.constant;
    for (std::size_t i = 0; i < p.bidder.size() && i < types.size(); ++i) {
      if (p.bidder[i] != 0) v += p.bidder[i] * types[i].expect(X);
    }
    for (std::size_t i = 0; i < p.price.size() && i < prices.size(); ++i) v += p.price[i] * prices[i];
    for (const auto& [x, prob] : X) {
      auto it = p.outcome.find(x);
      if (it != p.outcome.end()) v += prob * it->second;
    }
    if (!best || v < *best) best = v;
  }
  return best.value_or(Rational(0));
}

// ------------------------------------------------------------------ layout

Layout::Layout(std::vector<int> type_counts, bool with_objective)
    : counts_(std::move(type_counts)), with_objective_(with_objective) {
  Eigen::Index off = with_objective ? 1 : 0;
  for (int c : counts_) {
    pi_offset_.push_back(off);
    off += static_cast<Eigen::Index>(c) * c;
  }
  pi_size_ = off - (with_objective ? 1 : 0);
  for (int c : counts_) {
    price_offset_.push_back(off);
    off += c;
  }
  price_size_ = off - pi_size_ - (with_objective ? 1 : 0);
  dim_ = off;
}

Eigen::Index Layout::objective_index() const {
  if (!with_objective_) throw DimensionError("layout has no objective coordinate");
  return 0;
}

Eigen::Index Layout::pi_index(int i, int t, int tp) const {
  return pi_offset_[static_cast<std::size_t>(i)] + static_cast<Eigen::Index>(t) * counts_[static_cast<std::size_t>(i)] + tp;
}

Eigen::Index Layout::price_index(int i, int t) const {
  return price_offset_[static_cast<std::size_t>(i)] + t;
}

Rational DirectionVector::clamped_objective() const {
  Rational w = objective();
  return w > 0 ? w : Rational(0);
}

Rational implicit_form_dot(const ImplicitForm& f, const DirectionVector& w) {
  if (f.layout != w.layout) throw DimensionError("implicit form and direction layouts differ");
  return f.values.dot(w.values);
}

Rational bic_slack(const ImplicitForm& f, int i, int t, int tp) {
  return f.pi(i, t, t) - f.price(i, t) - f.pi(i, t, tp) + f.price(i, tp);
}

Rational ir_slack(const ImplicitForm& f, int i, int t) { return f.pi(i, t, t) - f.price(i, t); }

bool satisfies_bic_ir(const ImplicitForm& f) {
  const auto& counts = f.layout.type_counts();
  for (int i = 0; i < static_cast<int>(counts.size()); ++i) {
    for (int t = 0; t < counts[static_cast<std::size_t>(i)]; ++t) {
      if (ir_slack(f, i, t) < 0) return false;
      for (int tp = 0; tp < counts[static_cast<std::size_t>(i)]; ++tp) {
        if (bic_slack(f, i, t, tp) < 0) return false;
      }
    }
  }
  return true;
}

ImplicitForm scale(const ImplicitForm& f, const Rational& alpha) {
  ImplicitForm g = f;
  g.values *= alpha;
  return g;
}

// -------------------------------------------------------------- validation

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (const auto& v : violations) os << v.location << ": " << v.message << "\n";
  return os.str();
}

ValidationReport validate_instance(const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj) {
  ValidationReport rep;
  auto add = [&](std::string loc, std::string msg) { rep.violations.push_back({std::move(loc), std::move(msg)}); };
  if (ts.bidders() == 0) add("bidders", "no bidders");
  for (int i = 0; i < ts.bidders(); ++i) {
    const std::string bl = "bidder " + std::to_string(i);
    const auto& b = ts.bidder(i);
    if (b.types.empty()) add(bl, "no types");
    if (b.prior.size() != b.types.size()) {
      add(bl, "prior has " + std::to_string(b.prior.size()) + " entries for " +
                  std::to_string(b.types.size()) + " types");
    }
    Rational sum(0);
    for (std::size_t t = 0; t < b.prior.size(); ++t) {
      sum += b.prior[t];
      if (b.prior[t] <= 0) add(bl + " type " + std::to_string(t), "prior probability is not positive");
    }
    if (sum != 1) add(bl, "prior sums to " + format_rational(sum));
    for (std::size_t t = 0; t < b.types.size(); ++t) {
      const std::string tl = bl + " type " + std::to_string(t);
      const Valuation& v = b.types[t];
      if (v.kind() == Valuation::Kind::kTable) {
        for (const auto& [x, val] : v.table_values()) {
          if (!os.contains(x)) add(tl, "value on unknown outcome " + std::to_string(x));
          if (val > 1) add(tl, "value exceeds 1 on outcome " + os.label_of(x));
        }
      } else if (v.kind() == Valuation::Kind::kAdditive) {
        const MatrixQ& a = v.additive_values();
        const Eigen::Index rows = os.kind() == OutcomeSpace::Kind::kBipartiteGrid ? os.rows() : 1;
        if (a.rows() != rows || a.cols() != os.items()) add(tl, "additive matrix shape does not match outcome space");
        else if (v.max_value(os) > 1) add(tl, "value exceeds 1");
      } else {
        if (v.declared_bound() > 1) add(tl, "declared bound exceeds 1");
      }
    }
  }
  if (obj.pieces.empty()) add("objective", "no linear pieces");
  for (std::size_t k = 0; k < obj.pieces.size(); ++k) {
    const auto& p = obj.pieces[k];
    const std::string pl = "objective piece " + std::to_string(k);
    if (p.bidder.size() != static_cast<std::size_t>(ts.bidders()) ||
        p.price.size() != static_cast<std::size_t>(ts.bidders())) {
      add(pl, "coefficient vectors do not match the bidder count");
    }
    for (const auto& [x, val] : p.outcome) {
      if (!os.contains(x)) add(pl, "term on unknown outcome " + std::to_string(x));
    }
  }
  return rep;
}

std::pair<TypeSpace, Rational> rescale_to_unit(const TypeSpace& ts, const OutcomeSpace& os) {
  Rational M(0);
  for (int i = 0; i < ts.bidders(); ++i) {
    for (int t = 0; t < ts.types(i); ++t) M = std::max(M, ts.type(i, t).max_value(os));
  }
  if (M <= 1) return {ts, Rational(1)};
  std::vector<BidderTypes> bidders;
  for (int i = 0; i < ts.bidders(); ++i) {
    BidderTypes b = ts.bidder(i);
    for (auto& v : b.types) v = v.scaled(Rational(1) / M);
    bidders.push_back(std::move(b));
  }
  return {TypeSpace(std::move(bidders)), M};
}

}  // namespace mechkit
