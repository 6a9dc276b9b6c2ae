#include "mechkit/sadp.hpp"

#include <sstream>

#include "mechkit/lp.hpp"

namespace mechkit {

SadpSolution SadpOracle::operator()(const SadpInstance& inst) const {
  CounterRng rng(0);
  return solver(inst, rng);
}

Rational difference(const SadpInstance& inst, int j, const Distribution& X) {
  const auto k = static_cast<int>(inst.fs.size());
  if (j < 1 || j > k) throw ValidationError("SADP index out of range");
  Rational a = inst.fs[static_cast<std::size_t>(j - 1)].expect(X);
  Rational b = j < k ? inst.fs[static_cast<std::size_t>(j)].expect(X) : Rational(0);
  return a - b;
}

Rational instance_value(const SadpInstance& inst, const SadpSolution& sol) {
  Rational v = inst.fs.size() >= 2 ? difference(inst, 1, sol.allocation)
                                   : (inst.fs.empty() ? Rational(0) : inst.fs[0].expect(sol.allocation));
  if (!inst.general()) return v;
  std::vector<Rational> prices = sol.prices.value_or(std::vector<Rational>(static_cast<std::size_t>(inst.bidders()), Rational(0)));
  const Rational c0 = inst.c0.value_or(Rational(0));
  if (c0 != 0) v += c0 * inst.objective.evaluate(*inst.gs, sol.allocation, prices);
  if (inst.cs) {
    for (std::size_t i = 0; i < inst.cs->size(); ++i) v += (*inst.cs)[i] * prices[i];
  }
  return v;
}

namespace {

Rational revenue_diff(const SadpInstance& inst, OutcomeId x) {
  Rational v = inst.fs.empty() ? Rational(0) : inst.fs[0](x);
  if (inst.fs.size() >= 2) v -= inst.fs[1](x);
  return v;
}

SadpSolution brute_force_linear(const SadpInstance& inst, const std::vector<OutcomeId>& outcomes) {
  const int m = inst.bidders();
  const Rational c0 = inst.c0.value_or(Rational(0));
  const LinearPiece* piece = (c0 != 0 && inst.general()) ? &inst.objective.pieces.front() : nullptr;
  std::optional<Rational> best;
  OutcomeId arg = 0;
  for (OutcomeId x : outcomes) {
    Rational v = revenue_diff(inst, x);
    if (piece) {
      Rational o(0);
      for (int i = 0; i < m; ++i) {
        const Rational& a = piece->bidder[static_cast<std::size_t>(i)];
        if (a != 0) o += a * (*inst.gs)[static_cast<std::size_t>(i)](x);
      }
      if (auto it = piece->outcome.find(x); it != piece->outcome.end()) o += it->second;
      v += c0 * o;
    }
    if (!best || v > *best) {
      best = v;
      arg = x;
    }
  }
  SadpSolution sol;
  sol.allocation = point_mass(arg);
  sol.achieved_index = 1;
  if (inst.general()) {
    std::vector<Rational> prices(static_cast<std::size_t>(m), Rational(0));
    for (int i = 0; i < m; ++i) {
      Rational coef = inst.cs ? (*inst.cs)[static_cast<std::size_t>(i)] : Rational(0);
      if (piece) coef += c0 * piece->price[static_cast<std::size_t>(i)];
      if (coef > 0) prices[static_cast<std::size_t>(i)] = 1;
    }
    sol.prices = std::move(prices);
  }
  return sol;
}

// Exact LP over outcome distributions and prices when the concave minimum
// couples them (several pieces with a positive objective weight).
SadpSolution brute_force_pieces(const SadpInstance& inst, const std::vector<OutcomeId>& outcomes) {
  const int m = inst.bidders();
  const auto nx = static_cast<Eigen::Index>(outcomes.size());
  const Eigen::Index p0 = nx, v0 = nx + m;
  const Rational c0 = *inst.c0;
  LinearProgram<Rational> lp(nx + m + 1);
  for (Eigen::Index i = 0; i < m; ++i) lp.upper[static_cast<std::size_t>(p0 + i)] = Rational(1);
  lp.lower[static_cast<std::size_t>(v0)] = std::nullopt;
  for (Eigen::Index k = 0; k < nx; ++k) lp.objective(k) = revenue_diff(inst, outcomes[static_cast<std::size_t>(k)]);
  for (Eigen::Index i = 0; i < m; ++i) {
    lp.objective(p0 + i) = inst.cs ? (*inst.cs)[static_cast<std::size_t>(i)] : Rational(0);
  }
  lp.objective(v0) = c0;
  VectorQ simplex = lp.zero_row();
  simplex.head(nx).setOnes();
  lp.add_row(simplex, Sense::kEqual, Rational(1));
  for (const auto& piece : inst.objective.pieces) {
    VectorQ row = lp.zero_row();
    row(v0) = 1;
    for (Eigen::Index k = 0; k < nx; ++k) {
      const OutcomeId x = outcomes[static_cast<std::size_t>(k)];
      Rational val(0);
      for (int i = 0; i < m; ++i) {
        const Rational& a = piece.bidder[static_cast<std::size_t>(i)];
        if (a != 0) val += a * (*inst.gs)[static_cast<std::size_t>(i)](x);
      }
      if (auto it = piece.outcome.find(x); it != piece.outcome.end()) val += it->second;
      row(k) = -val;
    }
    for (Eigen::Index i = 0; i < m; ++i) row(p0 + i) = -piece.price[static_cast<std::size_t>(i)];
    lp.add_row(row, Sense::kLessEqual, piece.constant);
  }
  auto res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal) throw PrecisionError("SADP objective LP did not solve");
  SadpSolution sol;
  for (Eigen::Index k = 0; k < nx; ++k) {
    if (res.x(k) != 0) sol.allocation.emplace_back(outcomes[static_cast<std::size_t>(k)], res.x(k));
  }
  sol.allocation = canonical(std::move(sol.allocation));
  std::vector<Rational> prices(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) prices[static_cast<std::size_t>(i)] = res.x(p0 + i);
  sol.prices = std::move(prices);
  sol.achieved_index = 1;
  return sol;
}

}  // namespace

SadpSolution brute_force_sadp(const SadpInstance& inst, std::size_t limit) {
  if (inst.fs.size() < 2 && !inst.general()) throw ValidationError("SADP needs at least two functions");
  const auto outcomes = inst.space.enumerate(limit);
  const bool coupled = inst.general() && inst.c0 && *inst.c0 != 0 && inst.objective.pieces.size() > 1;
  return coupled ? brute_force_pieces(inst, outcomes) : brute_force_linear(inst, outcomes);
}

ProfileWeights prior_weights(const TypeSpace& ts, const std::vector<int>& profile) {
  ProfileWeights w;
  for (int i = 0; i < ts.bidders(); ++i) {
    const Rational& p = ts.prior(i, profile[static_cast<std::size_t>(i)]);
    if (p <= 0) throw ValidationError("virtual transform needs a positive prior");
    w.rho.push_back(Rational(1) / p);
  }
  return w;
}

SadpInstance virtual_transform_revenue(const DirectionVector& w, const std::vector<int>& profile, const TypeSpace& ts,
                                       const OutcomeSpace& os) {
  return virtual_transform_revenue(w, profile, ts, os, prior_weights(ts, profile));
}

SadpInstance virtual_transform_revenue(const DirectionVector& w, const std::vector<int>& profile, const TypeSpace& ts,
                                       const OutcomeSpace& os, const ProfileWeights& weights) {
  SadpInstance inst;
  inst.space = os;
  inst.objective = ObjectiveSpec::revenue(ts.bidders());
  inst.fs.resize(2);
  for (int i = 0; i < ts.bidders(); ++i) {
    const int tp = profile[static_cast<std::size_t>(i)];
    const Rational& rho = weights.rho[static_cast<std::size_t>(i)];
    if (rho == 0) continue;
    for (int t = 0; t < ts.types(i); ++t) {
      const Rational& c = w.pi(i, t, tp);
      if (c > 0) inst.fs[0].add(c * rho, ts.type(i, t));
      if (c < 0) inst.fs[1].add(-c * rho, ts.type(i, t));
    }
  }
  return inst;
}

SadpInstance virtual_transform_general(const DirectionVector& w, const std::vector<int>& profile, const TypeSpace& ts,
                                       const OutcomeSpace& os, const ObjectiveSpec& obj) {
  return virtual_transform_general(w, profile, ts, os, obj, prior_weights(ts, profile));
}

SadpInstance virtual_transform_general(const DirectionVector& w, const std::vector<int>& profile, const TypeSpace& ts,
                                       const OutcomeSpace& os, const ObjectiveSpec& obj, const ProfileWeights& weights) {
  SadpInstance inst = virtual_transform_revenue(w, profile, ts, os, weights);
  inst.objective = obj;
  std::vector<Valuation> gs;
  for (int i = 0; i < ts.bidders(); ++i) gs.push_back(ts.type(i, profile[static_cast<std::size_t>(i)]));
  inst.gs = std::move(gs);
  inst.c0 = w.clamped_objective() * weights.omega;
  if (!obj.allocation_only()) {
    std::vector<Rational> cs;
    for (int i = 0; i < ts.bidders(); ++i) {
      cs.push_back(w.price(i, profile[static_cast<std::size_t>(i)]) * weights.rho[static_cast<std::size_t>(i)]);
    }
    inst.cs = std::move(cs);
  }
  return inst;
}

namespace {

void write_valuation(std::ostream& os, const Valuation& v) {
  switch (v.kind()) {
    case Valuation::Kind::kTable:
      os << "T{";
      for (const auto& [x, val] : v.table_values()) os << x << ':' << format_rational(val) << ',';
      os << '}';
      break;
    case Valuation::Kind::kAdditive: {
      const MatrixQ& a = v.additive_values();
      os << "A" << a.rows() << 'x' << a.cols() << '[';
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) os << format_rational(a(i, j)) << ',';
      }
      os << ']';
      break;
    }
    case Valuation::Kind::kOracle:
      os << "O:" << v.name() << ':' << format_rational(v.declared_bound());
      break;
  }
}

}  // namespace

std::string instance_digest_text(const SadpInstance& inst) {
  std::ostringstream os;
  os << "space:" << inst.space.family() << ':' << inst.space.rows() << ':' << inst.space.items() << ';';
  for (const auto& f : inst.fs) {
    os << "f[";
    for (const auto& [c, v] : f.terms) {
      os << format_rational(c) << '*';
      write_valuation(os, v);
      os << '+';
    }
    os << ']';
  }
  if (inst.gs) {
    os << "g[";
    for (const auto& g : *inst.gs) {
      write_valuation(os, g);
      os << ',';
    }
    os << ']';
  }
  if (inst.cs) {
    os << "c[";
    for (const auto& c : *inst.cs) os << format_rational(c) << ',';
    os << ']';
  }
  if (inst.c0) os << "c0:" << format_rational(*inst.c0);
  os << "obj:" << inst.objective.name;
  return os.str();
}

std::uint64_t instance_digest(const SadpInstance& inst) { return fnv1a(instance_digest_text(inst)); }

SadpOracle derandomize(const SadpOracle& G, std::size_t trials, std::uint64_t seed) {
  if (!G.randomized) return G;
  if (trials == 0) throw ValidationError("derandomization needs at least one trial");
  SadpOracle out;
  out.alpha = G.alpha;
  out.randomized = false;
  out.name = G.name;
  out.solver = [G, trials, seed](const SadpInstance& inst, CounterRng&) {
    CounterRng base = CounterRng(seed).split(instance_digest(inst));
    std::optional<SadpSolution> best;
    std::optional<Rational> best_value;
    for (std::size_t k = 0; k < trials; ++k) {
      CounterRng stream = base.split(k);
      SadpSolution s = G.solver(inst, stream);
      Rational v = instance_value(inst, s);
      if (!best_value || v > *best_value) {
        best_value = v;
        best = std::move(s);
      }
    }
    return *best;
  };
  return out;
}

Rational certify_ratio(const SadpInstance& inst, const SadpSolution& sol, const SadpSolution& exact) {
  auto ratio = [](const Rational& achieved, const Rational& optimum) {
    if (optimum <= 0) return achieved >= optimum ? Rational(1) : Rational(0);
    if (achieved <= 0) return Rational(0);
    return Rational(achieved / optimum);
  };
  if (inst.general()) return ratio(instance_value(inst, sol), instance_value(inst, exact));
  const int k = static_cast<int>(inst.fs.size());
  Rational best = ratio(difference(inst, 1, sol.allocation), difference(inst, 1, exact.allocation));
  std::vector<OutcomeId> outcomes;
  try {
    outcomes = inst.space.enumerate();
  } catch (const SizeError&) {
    return best;
  }
  for (int j = 2; j < k; ++j) {
    Rational opt(0);
    for (OutcomeId x : outcomes) opt = std::max(opt, difference(inst, j, point_mass(x)));
    best = std::max(best, ratio(difference(inst, j, sol.allocation), opt));
  }
  return best;
}

SadpOracle exact_sadp_oracle() {
  SadpOracle o;
  o.alpha = 1;
  o.name = "exact";
  o.solver = [](const SadpInstance& inst, CounterRng&) { return brute_force_sadp(inst); };
  return o;
}

SadpOracle halved_sadp_oracle() {
  SadpOracle o;
  o.alpha = Rational(1, 2);
  o.name = "halved";
  o.solver = [](const SadpInstance& inst, CounterRng&) {
    SadpSolution s = brute_force_sadp(inst);
    s.allocation = mix(s.allocation, Rational(1, 2), point_mass(0), Rational(1, 2));
    if (s.prices) {
      for (auto& p : *s.prices) p /= 2;
    }
    return s;
  };
  return o;
}

}  // namespace mechkit
