#include "mechkit/mdmdp.hpp"

#include <cmath>
#include <map>

namespace mechkit {

// ---------------------------------------------------------------- surrogate

Rational SurrogatePrior::marginal(int i, int t) const {
  Rational s(0);
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    if (profiles[k][static_cast<std::size_t>(i)] == t) s += weights[k];
  }
  return s;
}

Rational SurrogatePrior::others_weight(const std::vector<int>& q, int i) const {
  Rational s(0);
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    bool agree = true;
    for (std::size_t j = 0; j < q.size() && agree; ++j) {
      if (static_cast<int>(j) != i && profiles[k][j] != q[j]) agree = false;
    }
    if (agree) s += weights[k];
  }
  return s;
}

Rational SurrogatePrior::weight(const std::vector<int>& q) const {
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    if (profiles[k] == q) return weights[k];
  }
  return Rational(0);
}

std::vector<SurrogatePrior::Substituted> SurrogatePrior::substituted(const TypeSpace& ts) const {
  const int m = ts.bidders();
  // others[i][p with p_i = -1] = total weight.
  std::vector<std::map<std::vector<int>, Rational>> others(static_cast<std::size_t>(m));
  std::map<std::vector<int>, Rational> own;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    own[profiles[k]] += weights[k];
    for (int i = 0; i < m; ++i) {
      std::vector<int> key = profiles[k];
      key[static_cast<std::size_t>(i)] = -1;
      others[static_cast<std::size_t>(i)][key] += weights[k];
    }
  }
  std::map<std::vector<int>, ProfileWeights> out;
  for (int i = 0; i < m; ++i) {
    for (const auto& [key, wt] : others[static_cast<std::size_t>(i)]) {
      for (int t = 0; t < ts.types(i); ++t) {
        std::vector<int> q = key;
        q[static_cast<std::size_t>(i)] = t;
        auto [it, fresh] = out.try_emplace(q);
        if (fresh) it->second.rho.assign(static_cast<std::size_t>(m), Rational(0));
        it->second.rho[static_cast<std::size_t>(i)] = wt;
      }
    }
  }
  std::vector<Substituted> res;
  res.reserve(out.size());
  for (auto& [q, w] : out) {
    auto it = own.find(q);
    w.omega = it == own.end() ? Rational(0) : it->second;
    res.push_back({q, std::move(w)});
  }
  return res;
}

SurrogatePrior exact_prior(const TypeSpace& ts) {
  SurrogatePrior p;
  p.profiles = ts.profiles();
  for (const auto& q : p.profiles) p.weights.push_back(ts.profile_probability(q));
  return p;
}

SurrogatePrior sample_surrogate(const TypeSpace& ts, std::size_t M, std::uint64_t seed) {
  if (M == 0) throw ValidationError("surrogate size must be at least 1");
  CounterRng rng = CounterRng(seed).split(0x5u);
  std::vector<std::vector<double>> cdf;
  for (int i = 0; i < ts.bidders(); ++i) {
    std::vector<double> c;
    double acc = 0;
    for (int t = 0; t < ts.types(i); ++t) c.push_back(acc += to_double(ts.prior(i, t)));
    cdf.push_back(std::move(c));
  }
  std::map<std::vector<int>, std::size_t> counts;
  std::vector<int> q(static_cast<std::size_t>(ts.bidders()));
  for (std::size_t s = 0; s < M; ++s) {
    for (int i = 0; i < ts.bidders(); ++i) {
      const auto& c = cdf[static_cast<std::size_t>(i)];
      const double u = rng.uniform() * c.back();
      int t = 0;
      while (t + 1 < static_cast<int>(c.size()) && u >= c[static_cast<std::size_t>(t)]) ++t;
      q[static_cast<std::size_t>(i)] = t;
    }
    ++counts[q];
  }
  SurrogatePrior p;
  p.sample_size = M;
  for (const auto& [prof, n] : counts) {
    p.profiles.push_back(prof);
    p.weights.emplace_back(static_cast<long>(n), static_cast<long>(M));
  }
  return p;
}

std::size_t default_surrogate_size(const TypeSpace& ts, const Rational& eps) {
  if (eps <= 0) throw ValidationError("epsilon must be positive");
  const Rational inv = 1 / (eps * eps);
  const Integer num = numerator(inv), den = denominator(inv);
  const Integer ceil_inv = (num + den - 1) / den;
  std::size_t types = 0;
  for (int i = 0; i < ts.bidders(); ++i) types += static_cast<std::size_t>(ts.types(i));
  const Integer cap(1000000000);
  Integer M = Integer(50) * Integer(types) * ceil_inv;
  if (M > cap) M = cap;
  return std::max<std::size_t>(1000, M.convert_to<std::size_t>());
}

// ---------------------------------------------------------- interim forms

SadpInstance surrogate_instance(const DirectionVector& w, const std::vector<int>& q, const ProfileWeights& weights,
                                const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj) {
  if (w.layout.has_objective()) return virtual_transform_general(w, q, ts, os, obj, weights);
  return virtual_transform_revenue(w, q, ts, os, weights);
}

ImplicitForm interim_form_of_direction(const DirectionVector& w, const SurrogatePrior& prior, const SadpOracle& G,
                                       const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj) {
  ImplicitForm f(w.layout);
  const bool track_objective = w.layout.has_objective() && w.objective() >= 0;
  for (const auto& sub : prior.substituted(ts)) {
    const SadpInstance inst = surrogate_instance(w, sub.profile, sub.weights, ts, os, obj);
    const SadpSolution sol = G(inst);
    Rational mass(0);
    for (const auto& [x, p] : sol.allocation) {
      if (!os.contains(x) || p < 0) throw ContractError("SADP oracle returned an infeasible allocation");
      mass += p;
    }
    if (mass != 1) throw ContractError("SADP oracle returned probabilities summing to " + format_rational(mass));
    std::vector<Valuation> reported;
    for (int i = 0; i < ts.bidders(); ++i) {
      const int tp = sub.profile[static_cast<std::size_t>(i)];
      reported.push_back(ts.type(i, tp));
      const Rational& rho = sub.weights.rho[static_cast<std::size_t>(i)];
      if (rho == 0) continue;
      for (int t = 0; t < ts.types(i); ++t) f.pi(i, t, tp) += rho * ts.type(i, t).expect(sol.allocation);
      if (sol.prices) f.price(i, tp) += rho * (*sol.prices)[static_cast<std::size_t>(i)];
    }
    if (track_objective && sub.weights.omega != 0) {
      std::vector<Rational> prices = sol.prices.value_or(std::vector<Rational>(reported.size(), Rational(0)));
      f.objective() += sub.weights.omega * obj.evaluate(reported, sol.allocation, prices);
    }
  }
  return f;
}

// --------------------------------------------------------------------- LPs

namespace {

void add_bic_ir_rows(MechanismLp& m) {
  const Layout& L = m.layout;
  const Eigen::Index d = L.dim();
  for (int i = 0; i < L.bidders(); ++i) {
    const int T = L.type_counts()[static_cast<std::size_t>(i)];
    for (int t = 0; t < T; ++t) {
      for (int tp = 0; tp < T; ++tp) {
        if (tp == t) continue;
        // pi(t,t') - P(t') - pi(t,t) + P(t) <= 0
        VectorQ n = VectorQ::Zero(d);
        n(L.pi_index(i, t, tp)) += 1;
        n(L.price_index(i, tp)) -= 1;
        n(L.pi_index(i, t, t)) -= 1;
        n(L.price_index(i, t)) += 1;
        m.lp.rows.push_back(Halfspace{n, Rational(0)});
        ++m.bic_rows;
      }
      VectorQ n = VectorQ::Zero(d);
      n(L.price_index(i, t)) = 1;
      n(L.pi_index(i, t, t)) = -1;
      m.lp.rows.push_back(Halfspace{n, Rational(0)});
      ++m.ir_rows;
    }
  }
}

LpBlock range_block(const Layout& L, Eigen::Index begin, Eigen::Index size, bool with_objective, std::string name) {
  LpBlock b;
  b.name = std::move(name);
  if (with_objective) b.coords.push_back(L.objective_index());
  for (Eigen::Index k = 0; k < size; ++k) b.coords.push_back(begin + k);
  return b;
}

Rational objective_bound(const ObjectiveSpec& obj) {
  Rational B(0);
  for (const auto& p : obj.pieces) {
    Rational s = abs_q(p.constant);
    for (const auto& a : p.bidder) s += abs_q(a);
    for (const auto& b : p.price) s += abs_q(b);
    Rational o(0);
    for (const auto& [x, v] : p.outcome) o = std::max(o, abs_q(v));
    B = std::max(B, s + o);
  }
  return B;
}

}  // namespace

MechanismLp build_revenue_lp(const TypeSpace& ts, const SurrogatePrior& prior) {
  MechanismLp m;
  m.layout = Layout(ts.type_counts(), false);
  const Eigen::Index d = m.layout.dim();
  m.lp.objective = VectorQ::Zero(d);
  m.lp.lower = VectorQ::Zero(d);
  m.lp.upper = VectorQ::Ones(d);
  for (int i = 0; i < ts.bidders(); ++i) {
    for (int t = 0; t < ts.types(i); ++t) m.lp.objective(m.layout.price_index(i, t)) = prior.marginal(i, t);
  }
  add_bic_ir_rows(m);
  m.blocks.push_back(range_block(m.layout, m.layout.pi_begin(), m.layout.pi_size(), false, "allocation"));
  return m;
}

MechanismLp build_general_lp(const TypeSpace& ts, const ObjectiveSpec& obj) {
  MechanismLp m;
  m.layout = Layout(ts.type_counts(), true);
  const Layout& L = m.layout;
  const Eigen::Index d = L.dim();
  m.lp.objective = VectorQ::Zero(d);
  m.lp.lower = VectorQ::Zero(d);
  m.lp.upper = VectorQ::Ones(d);
  const Rational B = objective_bound(obj);
  m.lp.lower(L.objective_index()) = -B;
  m.lp.upper(L.objective_index()) = B;
  m.lp.objective(L.objective_index()) = 1;
  add_bic_ir_rows(m);
  if (obj.allocation_only()) {
    m.blocks.push_back(range_block(L, L.pi_begin(), L.pi_size(), true, "objective+allocation"));
  } else if (obj.price_only()) {
    m.blocks.push_back(range_block(L, L.pi_begin(), L.pi_size(), false, "allocation"));
    m.blocks.push_back(range_block(L, L.price_begin(), L.price_size(), true, "objective+prices"));
  } else {
    m.blocks.push_back(range_block(L, L.pi_begin(), L.pi_size() + L.price_size(), true, "joint"));
  }
  return m;
}

// ------------------------------------------------------------------- audit

AuditReport audit_epsilon_bic(const ImplicitForm& f, const Rational& eps) {
  AuditReport r;
  const Layout& L = f.layout;
  for (int i = 0; i < L.bidders(); ++i) {
    const int T = L.type_counts()[static_cast<std::size_t>(i)];
    for (int t = 0; t < T; ++t) {
      for (int tp = 0; tp < T; ++tp) {
        if (tp == t) continue;
        Rational regret = std::max(Rational(0), Rational(-bic_slack(f, i, t, tp)));
        r.regrets[{i, t, tp}] = regret;
        r.max_bic_regret = std::max(r.max_bic_regret, regret);
      }
      Rational v = std::max(Rational(0), Rational(-ir_slack(f, i, t)));
      r.regrets[{i, t, -1}] = v;
      r.max_ir_violation = std::max(r.max_ir_violation, v);
    }
  }
  r.passed = r.max_bic_regret <= eps && r.max_ir_violation <= eps;
  return r;
}

Rational implicit_objective(const ImplicitForm& f, const ObjectiveSpec& obj, const SurrogatePrior& prior) {
  if (f.layout.has_objective()) return f.objective();
  (void)obj;
  Rational s(0);
  for (int i = 0; i < f.layout.bidders(); ++i) {
    for (int t = 0; t < f.layout.type_counts()[static_cast<std::size_t>(i)]; ++t) {
      s += prior.marginal(i, t) * f.price(i, t);
    }
  }
  return s;
}

// ------------------------------------------------------------------- solve

namespace {

std::uint64_t derandomize_seed(std::uint64_t seed) { return mix64(seed ^ 0xD1B54A32D192ED03ULL); }

std::size_t default_trials(const Rational& eps) {
  // Success probability at least 1/2 per call fails all trials w.p. 2^-trials <= eps/4.
  const double bits = std::log2(4.0 / to_double(eps));
  return static_cast<std::size_t>(std::max(1.0, std::ceil(bits)));
}

bool homogeneous(const ObjectiveSpec& obj) {
  for (const auto& p : obj.pieces) {
    if (!p.outcome.empty() || p.constant != 0) return false;
  }
  return true;
}

DirectionVector embed(const Layout& L, const LpBlock& b, const VectorQ& wb) {
  DirectionVector w(L);
  for (std::size_t k = 0; k < b.coords.size(); ++k) w.values(b.coords[k]) = wb(static_cast<Eigen::Index>(k));
  return w;
}

VectorQ restrict(const VectorQ& v, const LpBlock& b) {
  VectorQ r(static_cast<Eigen::Index>(b.coords.size()));
  for (std::size_t k = 0; k < b.coords.size(); ++k) r(static_cast<Eigen::Index>(k)) = v(b.coords[k]);
  return r;
}

}  // namespace

SadpOracle blueprint_oracle(const MechanismBlueprint& b, const SadpOracle& G) {
  return derandomize(G, b.trials, derandomize_seed(b.seed));
}

MdmdpResult solve_mdmdp(const TypeSpace& ts_in, const OutcomeSpace& os, const ObjectiveSpec& obj, const SadpOracle& G,
                        const MdmdpOptions& opt) {
  const auto rescaled = rescale_to_unit(ts_in, os);
  const TypeSpace& ts = rescaled.first;
  const Rational& scale = rescaled.second;
  if (scale != 1 && obj.kind != ObjectiveKind::kRevenue && !homogeneous(obj)) {
    throw ValidationError("values exceed 1 and the objective has outcome or constant terms; normalise the instance");
  }
  if (auto rep = validate_instance(ts, os, obj); !rep.ok()) throw ValidationError(rep.summary());

  MdmdpResult res;
  MechanismBlueprint& bp = res.blueprint;
  bp.objective = obj;
  bp.oracle_name = G.name;
  bp.alpha = G.alpha;
  bp.seed = opt.seed;
  bp.scale = scale;
  bp.trials = G.randomized ? (opt.trials ? opt.trials : default_trials(opt.epsilon)) : 1;
  if (opt.exact_prior) {
    bp.prior = exact_prior(ts);
  } else {
    const std::size_t M = opt.surrogate_size ? opt.surrogate_size : default_surrogate_size(ts, opt.epsilon / 2);
    bp.prior = sample_surrogate(ts, M, opt.seed);
  }
  const SadpOracle Gp = blueprint_oracle(bp, G);

  MechanismLp mlp = obj.kind == ObjectiveKind::kRevenue ? build_revenue_lp(ts, bp.prior) : build_general_lp(ts, obj);
  bp.layout = mlp.layout;
  const Layout& L = mlp.layout;

  std::vector<std::unique_ptr<WeirdSeparationOracle>> wsos;
  for (const auto& blk : mlp.blocks) {
    DirectionOracle A;
    A.dim = static_cast<Eigen::Index>(blk.coords.size());
    A.alpha = G.alpha;
    A.bit_bound = 64;
    A.evaluate = [&, blk](const VectorQ& wb) {
      ImplicitForm f = interim_form_of_direction(embed(L, blk, wb), bp.prior, Gp, ts, os, obj);
      return restrict(f.values, blk);
    };
    wsos.push_back(std::make_unique<WeirdSeparationOracle>(A, opt.wso));
  }
  std::vector<std::optional<std::pair<VectorQ, WsoVerdict>>> last(mlp.blocks.size());
  SeparationOracle sep = [&](const VectorQ& x) -> std::optional<Halfspace> {
    for (std::size_t b = 0; b < mlp.blocks.size(); ++b) {
      VectorQ xb = restrict(x, mlp.blocks[b]);
      WsoVerdict v = wsos[b]->query(xb);
      if (!v.yes) {
        VectorQ n = VectorQ::Zero(L.dim());
        for (std::size_t k = 0; k < mlp.blocks[b].coords.size(); ++k) {
          n(mlp.blocks[b].coords[k]) = v.separating.normal(static_cast<Eigen::Index>(k));
        }
        return Halfspace{n, v.separating.offset};
      }
      last[b].emplace(std::move(xb), std::move(v));
    }
    return std::nullopt;
  };

  OracleLpResult lpres;
  if (opt.engine == LpEngine::kCuttingPlane) {
    lpres = maximize_cutting_plane(mlp.lp, sep);
  } else {
    lpres = maximize_ellipsoid(mlp.lp, sep, opt.ellipsoid, -static_cast<double>(opt.ellipsoid.precision_bits) / 4.0);
  }
  res.lp_solution = ImplicitForm(L);
  res.lp_solution.values = lpres.x;
  res.lp_value = lpres.value;
  res.iterations = lpres.iterations;

  res.implicit = ImplicitForm(L);
  for (std::size_t b = 0; b < mlp.blocks.size(); ++b) {
    const LpBlock& blk = mlp.blocks[b];
    VectorQ xb = restrict(lpres.x, blk);
    if (!last[b] || last[b]->first != xb) {
      WsoVerdict v = wsos[b]->query(xb);
      if (!v.yes) throw PrecisionError("LP optimum rejected by the " + blk.name + " oracle", wsos[b]->transcript().str());
      last[b].emplace(xb, std::move(v));
    }
    const WsoVerdict& v = last[b]->second;
    BlueprintBlock bb;
    bb.block = blk;
    VectorQ replay = VectorQ::Zero(static_cast<Eigen::Index>(blk.coords.size()));
    for (std::size_t j = 0; j < v.points.size(); ++j) {
      if (v.coefficients[j] == 0) continue;
      VectorQ wj = v.directions[j];
      if (wj.isZero()) {
        wj = VectorQ::Zero(wj.size());
        wj(0) = 1;
      }
      bb.directions.push_back(embed(L, blk, wj));
      bb.coefficients.push_back(v.coefficients[j]);
      replay += v.coefficients[j] * v.points[j];
    }
    Rational gap(0);
    for (Eigen::Index k = 0; k < replay.size(); ++k) gap = std::max(gap, abs_q(replay(k) - xb(k)));
    if (gap > opt.wso.tol_decomp) {
      throw PrecisionError("decomposition residual " + format_rational(gap) + " exceeds tolerance",
                           wsos[b]->transcript().str());
    }
    for (std::size_t k = 0; k < blk.coords.size(); ++k) res.implicit.values(blk.coords[k]) = replay(static_cast<Eigen::Index>(k));
    bp.blocks.push_back(std::move(bb));
  }
  bp.interim_prices.resize(static_cast<std::size_t>(L.bidders()));
  for (int i = 0; i < L.bidders(); ++i) {
    for (int t = 0; t < L.type_counts()[static_cast<std::size_t>(i)]; ++t) {
      bp.interim_prices[static_cast<std::size_t>(i)].push_back(lpres.x(L.price_index(i, t)));
      res.implicit.price(i, t) = lpres.x(L.price_index(i, t));
    }
  }
  for (const auto& w : wsos) res.oracle_calls += w->oracle_calls();
  res.objective = implicit_objective(res.implicit, obj, bp.prior);
  res.objective_original = res.objective * scale;
  res.audit = audit_epsilon_bic(res.implicit, opt.epsilon);
  return res;
}

ImplicitForm replay_blueprint(const MechanismBlueprint& b, const TypeSpace& ts_in, const OutcomeSpace& os,
                              const SadpOracle& G) {
  const TypeSpace ts = rescale_to_unit(ts_in, os).first;
  const SadpOracle Gp = blueprint_oracle(b, G);
  ImplicitForm out(b.layout);
  for (const auto& bb : b.blocks) {
    for (std::size_t j = 0; j < bb.directions.size(); ++j) {
      ImplicitForm f = interim_form_of_direction(bb.directions[j], b.prior, Gp, ts, os, b.objective);
      for (Eigen::Index k : bb.block.coords) out.values(k) += bb.coefficients[j] * f.values(k);
    }
  }
  for (int i = 0; i < b.layout.bidders(); ++i) {
    for (int t = 0; t < b.layout.type_counts()[static_cast<std::size_t>(i)]; ++t) {
      out.price(i, t) = b.interim_prices[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
    }
  }
  return out;
}

MechanismOutcome run_mechanism(const MechanismBlueprint& b, const std::vector<int>& profile, const TypeSpace& ts_in,
                               const OutcomeSpace& os, const SadpOracle& G, std::uint64_t seed) {
  if (static_cast<int>(profile.size()) != ts_in.bidders()) throw ValidationError("profile has the wrong number of bidders");
  for (int i = 0; i < ts_in.bidders(); ++i) {
    const int t = profile[static_cast<std::size_t>(i)];
    if (t < 0 || t >= ts_in.types(i)) throw ValidationError("unknown type " + std::to_string(t) + " for bidder " + std::to_string(i));
  }
  const TypeSpace ts = rescale_to_unit(ts_in, os).first;
  const SadpOracle Gp = blueprint_oracle(b, G);
  CounterRng rng = CounterRng(seed).split(0x6u);
  const BlueprintBlock* alloc = nullptr;
  for (const auto& bb : b.blocks) {
    for (Eigen::Index k : bb.block.coords) {
      if (k == b.layout.pi_begin()) alloc = &bb;
    }
  }
  MechanismOutcome out;
  if (alloc && !alloc->directions.empty()) {
    const double u = rng.uniform();
    double acc = 0;
    std::size_t j = 0;
    for (; j + 1 < alloc->coefficients.size(); ++j) {
      acc += to_double(alloc->coefficients[j]);
      if (u < acc) break;
    }
    out.direction = j;
    ProfileWeights wts;
    for (int i = 0; i < ts.bidders(); ++i) wts.rho.push_back(b.prior.others_weight(profile, i));
    wts.omega = b.prior.weight(profile);
    SadpInstance inst = surrogate_instance(alloc->directions[j], profile, wts, ts, os, b.objective);
    SadpSolution sol = Gp(inst);
    const double v = rng.uniform();
    acc = 0;
    out.outcome = sol.allocation.back().first;
    for (const auto& [x, p] : sol.allocation) {
      acc += to_double(p);
      if (v < acc) {
        out.outcome = x;
        break;
      }
    }
  }
  for (int i = 0; i < ts.bidders(); ++i) {
    out.prices.push_back(b.interim_prices[static_cast<std::size_t>(i)][static_cast<std::size_t>(profile[static_cast<std::size_t>(i)])] * b.scale);
  }
  return out;
}

}  // namespace mechkit
