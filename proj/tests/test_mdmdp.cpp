#include <random>

#include "doctest.h"
#include "mechkit/brute_force.hpp"
#include "mechkit/mdmdp.hpp"

using namespace mechkit;

namespace {

Valuation table(std::initializer_list<std::pair<const OutcomeId, Rational>> v) { return Valuation::table(v); }

// t_a = {X1:1, X2:1}, t_b = {X1:1, X2:2}, prior 1/2 each.
TypeSpace two_type_space() {
  return TypeSpace({BidderTypes{{table({{1, 1}, {2, 1}}), table({{1, 1}, {2, 2}})}, {Rational(1, 2), Rational(1, 2)}}});
}

TypeSpace random_space(std::mt19937_64& rng, int outcomes) {
  const int m = 1 + static_cast<int>(rng() % 2);
  std::vector<BidderTypes> bs;
  for (int i = 0; i < m; ++i) {
    BidderTypes b;
    const int T = 1 + static_cast<int>(rng() % 3);
    std::vector<long> raw;
    long total = 0;
    for (int t = 0; t < T; ++t) {
      std::map<OutcomeId, Rational> vals;
      for (int x = 1; x <= outcomes; ++x) vals[static_cast<OutcomeId>(x)] = Rational(static_cast<long>(rng() % 256), 255);
      b.types.push_back(Valuation::table(vals));
      raw.push_back(1 + static_cast<long>(rng() % 4));
      total += raw.back();
    }
    for (long r : raw) b.prior.emplace_back(r, total);
    bs.push_back(std::move(b));
  }
  return TypeSpace(std::move(bs));
}

OutcomeSpace labelled(int n) {
  std::vector<std::string> labels;
  for (int k = 1; k <= n; ++k) labels.push_back("X" + std::to_string(k));
  return OutcomeSpace::explicit_outcomes(labels);
}

}  // namespace

TEST_CASE("surrogate of a singleton type space") {
  TypeSpace ts({BidderTypes{{table({{1, 1}})}, {Rational(1)}}});
  auto s = sample_surrogate(ts, 25, 7);
  REQUIRE(s.profiles.size() == 1);
  CHECK(s.weights[0] == 1);
  CHECK(s.sample_size == 25);
  auto one = sample_surrogate(two_type_space(), 1, 3);
  CHECK(one.profiles.size() == 1);
  CHECK(one.weights[0] == 1);
}

TEST_CASE("surrogate frequencies concentrate") {
  auto s = sample_surrogate(two_type_space(), 10000, 42);
  CHECK(abs_q(s.marginal(0, 0) - Rational(1, 2)) <= Rational(2, 100));
  CHECK(s.marginal(0, 0) + s.marginal(0, 1) == 1);
  auto again = sample_surrogate(two_type_space(), 10000, 42);
  CHECK(again.weights == s.weights);
}

TEST_CASE("default surrogate size") {
  CHECK(default_surrogate_size(two_type_space(), Rational(1, 2)) == 1000);
  CHECK(default_surrogate_size(two_type_space(), Rational(1, 10)) == 50 * 2 * 100);
}

TEST_CASE("constant oracle gives constant interim values") {
  TypeSpace ts = two_type_space();
  auto os = labelled(2);
  SadpOracle fixed;
  fixed.solver = [](const SadpInstance&, CounterRng&) { return SadpSolution{point_mass(2), std::nullopt, 1}; };
  DirectionVector w(Layout(ts.type_counts(), false));
  auto f = interim_form_of_direction(w, exact_prior(ts), fixed, ts, os, ObjectiveSpec::revenue(1));
  for (int t = 0; t < 2; ++t) {
    for (int tp = 0; tp < 2; ++tp) CHECK(f.pi(0, t, tp) == ts.type(0, t)(2));
  }
}

TEST_CASE("single bidder interim dot equals the best virtual welfare") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    TypeSpace ts = random_space(rng, 3);
    if (ts.bidders() != 1) continue;
    auto os = labelled(3);
    DirectionVector w(Layout(ts.type_counts(), false));
    for (Eigen::Index k = 0; k < w.values.size(); ++k) w.values(k) = Rational(static_cast<long>(rng() % 9) - 4, 4);
    auto f = interim_form_of_direction(w, exact_prior(ts), exact_sadp_oracle(), ts, os, ObjectiveSpec::revenue(1));
    Rational dot = implicit_form_dot(f, w);
    // Per report the best outcome for sum_t w(t, t') t(X); the report terms are independent.
    Rational expected(0);
    for (int tp = 0; tp < ts.types(0); ++tp) {
      Rational best(0);
      for (OutcomeId x = 0; x <= 3; ++x) {
        Rational v(0);
        for (int t = 0; t < ts.types(0); ++t) v += w.pi(0, t, tp) * ts.type(0, t)(x);
        best = std::max(best, v);
      }
      expected += best;
    }
    CHECK(dot == expected);
  }
}

TEST_CASE("two bidder interim form matches a triple loop") {
  std::mt19937_64 rng(9);
  TypeSpace ts({BidderTypes{{table({{1, 1}}), table({{2, 1}, {3, Rational(1, 2)}})}, {Rational(1, 3), Rational(2, 3)}},
                BidderTypes{{table({{2, 1}}), table({{1, Rational(1, 4)}, {3, 1}})}, {Rational(1, 2), Rational(1, 2)}}});
  auto os = labelled(3);
  SurrogatePrior sp;
  sp.profiles = {{0, 0}, {1, 0}, {1, 1}};
  sp.weights = {Rational(1, 3), Rational(1, 3), Rational(1, 3)};
  sp.sample_size = 3;
  // Table oracle: outcome chosen from the reported profile only.
  auto pick = [](const std::vector<int>& q) -> OutcomeId { return static_cast<OutcomeId>(1 + (q[0] + 2 * q[1]) % 3); };
  std::map<std::string, OutcomeId> by_digest;
  SadpOracle table_oracle;
  DirectionVector w(Layout(ts.type_counts(), false));
  for (Eigen::Index k = 0; k < w.values.size(); ++k) w.values(k) = Rational(static_cast<long>(k % 3) + 1, 3);
  // Map each substituted profile's instance to its outcome.
  for (const auto& sub : sp.substituted(ts)) {
    by_digest[instance_digest_text(surrogate_instance(w, sub.profile, sub.weights, ts, os, ObjectiveSpec::revenue(2)))] =
        pick(sub.profile);
  }
  table_oracle.solver = [&](const SadpInstance& inst, CounterRng&) {
    return SadpSolution{point_mass(by_digest.at(instance_digest_text(inst))), std::nullopt, 1};
  };
  auto f = interim_form_of_direction(w, sp, table_oracle, ts, os, ObjectiveSpec::revenue(2));
  for (int i = 0; i < 2; ++i) {
    for (int t = 0; t < 2; ++t) {
      for (int tp = 0; tp < 2; ++tp) {
        Rational expected(0);
        for (std::size_t k = 0; k < sp.profiles.size(); ++k) {
          std::vector<int> q = sp.profiles[k];
          q[static_cast<std::size_t>(i)] = tp;
          expected += sp.weights[k] * ts.type(i, t)(pick(q));
        }
        CHECK(f.pi(i, t, tp) == expected);
      }
    }
  }
}

TEST_CASE("revenue LP sizes") {
  TypeSpace one({BidderTypes{{table({{1, 1}})}, {Rational(1)}}});
  auto lp1 = build_revenue_lp(one, exact_prior(one));
  CHECK(lp1.variables() == 2);
  CHECK(lp1.ir_rows == 1);
  CHECK(lp1.bic_rows == 0);
  std::vector<BidderTypes> bs(2);
  for (auto& b : bs) {
    for (int t = 0; t < 3; ++t) b.types.push_back(table({{1, Rational(t, 3)}}));
    b.prior = {Rational(1, 3), Rational(1, 3), Rational(1, 3)};
  }
  TypeSpace ts(bs);
  CHECK(build_revenue_lp(ts, exact_prior(ts)).variables() == 24);
  CHECK(build_general_lp(ts, ObjectiveSpec::welfare(2)).variables() == 25);
}

TEST_CASE("general LP blocks follow the objective kind") {
  TypeSpace ts = two_type_space();
  auto fm = build_general_lp(ts, ObjectiveSpec::fmmf(1));
  REQUIRE(fm.blocks.size() == 1);
  for (Eigen::Index k : fm.blocks[0].coords) CHECK(k < fm.layout.price_begin());
  auto rev = build_general_lp(ts, ObjectiveSpec::revenue(1));
  CHECK(rev.blocks.size() == 2);
}

TEST_CASE("truthful implicit form satisfies the LP rows") {
  TypeSpace ts = two_type_space();
  auto lp = build_revenue_lp(ts, exact_prior(ts));
  ImplicitForm f(lp.layout);
  // Always give X2, charge 1.
  for (int t = 0; t < 2; ++t) {
    for (int tp = 0; tp < 2; ++tp) f.pi(0, t, tp) = ts.type(0, t)(2);
    f.price(0, t) = 1;
  }
  for (const auto& h : lp.lp.rows) CHECK(h.contains(f.values));
  CHECK(satisfies_bic_ir(f));
}

TEST_CASE("single type revenue extracts the full value") {
  TypeSpace ts({BidderTypes{{table({{1, 1}, {2, Rational(1, 2)}})}, {Rational(1)}}});
  auto os = labelled(2);
  auto r = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), exact_sadp_oracle());
  CHECK(r.objective == 1);
  CHECK(r.blueprint.interim_prices[0][0] == 1);
  CHECK(r.implicit.pi(0, 0, 0) == 1);
  CHECK(r.audit.passed);
}

TEST_CASE("two type instance has revenue three halves") {
  TypeSpace ts = two_type_space();
  auto os = labelled(2);
  auto r = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), exact_sadp_oracle());
  CHECK(r.objective_original == Rational(3, 2));
  CHECK(r.objective == Rational(3, 4));
  CHECK(r.blueprint.scale == 2);
  CHECK(r.audit.max_bic_regret == 0);
  CHECK(r.audit.max_ir_violation == 0);
  CHECK(brute_force_mechanism(ts, os, ObjectiveSpec::revenue(1)).value == Rational(3, 2));

  auto half = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), halved_sadp_oracle());
  CHECK(half.objective_original >= Rational(3, 4) - Rational(1, 10000));
  CHECK(half.objective_original <= Rational(3, 2));
  CHECK(abs_q(half.objective_original - brute_force_mechanism(ts, os, ObjectiveSpec::revenue(1), Rational(1, 2)).value) <=
        Rational(1, 1000000));
  CHECK(half.audit.passed);
}

TEST_CASE("blueprint replay reproduces the implicit form") {
  TypeSpace ts = two_type_space();
  auto os = labelled(2);
  auto r = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), exact_sadp_oracle());
  auto replay = replay_blueprint(r.blueprint, ts, os, exact_sadp_oracle());
  CHECK(replay.values == r.implicit.values);
  for (Eigen::Index k = 0; k < replay.values.size(); ++k) CHECK(abs_q(replay.values(k) - r.lp_solution.values(k)) <= pow2(-30));
  Rational total(0);
  for (const auto& bb : r.blueprint.blocks) {
    for (const auto& c : bb.coefficients) {
      CHECK(c >= 0);
      total += c;
    }
  }
  CHECK(total == static_cast<long>(r.blueprint.blocks.size()));
}

TEST_CASE("audit of constructed forms") {
  Layout L({2}, false);
  ImplicitForm zero(L);
  auto a = audit_epsilon_bic(zero, Rational(0));
  CHECK(a.max_bic_regret == 0);
  CHECK(a.max_ir_violation == 0);
  CHECK(a.passed);
  ImplicitForm bad(L);
  bad.pi(0, 0, 1) = Rational(1, 8);
  auto b = audit_epsilon_bic(bad, Rational(1, 16));
  CHECK(b.max_bic_regret == Rational(1, 8));
  CHECK(!b.passed);
}

TEST_CASE("exact reduction matches the dense LP on random instances") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 12; ++rep) {
    const int nout = 1 + static_cast<int>(rng() % 4);
    TypeSpace ts = random_space(rng, nout);
    auto os = labelled(nout);
    auto r = solve_mdmdp(ts, os, ObjectiveSpec::revenue(ts.bidders()), exact_sadp_oracle());
    auto bf = brute_force_mechanism(ts, os, ObjectiveSpec::revenue(ts.bidders()));
    CHECK(abs_q(r.objective_original - bf.value) <= Rational(1, 1000000));
    CHECK(r.audit.passed);
    auto h = solve_mdmdp(ts, os, ObjectiveSpec::revenue(ts.bidders()), halved_sadp_oracle());
    CHECK(h.objective_original >= bf.value / 2 - Rational(1, 10000));
    CHECK(r.objective_original >= h.objective_original - Rational(1, 1000000));
  }
}

TEST_CASE("revenue through the general path agrees with the revenue LP") {
  std::mt19937_64 rng(78);
  for (int rep = 0; rep < 4; ++rep) {
    TypeSpace ts = random_space(rng, 2);
    auto os = labelled(2);
    auto a = solve_mdmdp(ts, os, ObjectiveSpec::revenue(ts.bidders()), exact_sadp_oracle());
    ObjectiveSpec general = ObjectiveSpec::general(ObjectiveSpec::revenue(ts.bidders()).pieces, "revenue-general");
    auto b = solve_mdmdp(ts, os, general, exact_sadp_oracle());
    CHECK(abs_q(a.objective_original - b.objective_original) <= Rational(1, 1000000));
  }
}

TEST_CASE("welfare objective matches the dense LP") {
  std::mt19937_64 rng(79);
  for (int rep = 0; rep < 4; ++rep) {
    TypeSpace ts = random_space(rng, 3);
    auto os = labelled(3);
    auto obj = ObjectiveSpec::welfare(ts.bidders());
    auto r = solve_mdmdp(ts, os, obj, exact_sadp_oracle());
    auto bf = brute_force_mechanism(ts, os, obj);
    CHECK(abs_q(r.objective_original - bf.value) <= Rational(1, 1000000));
    CHECK(r.audit.passed);
  }
}

TEST_CASE("sampled surrogate run and mechanism execution") {
  TypeSpace ts = two_type_space();
  auto os = labelled(2);
  MdmdpOptions opt;
  opt.exact_prior = false;
  opt.surrogate_size = 500;
  opt.seed = 5;
  auto r = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), exact_sadp_oracle(), opt);
  CHECK(r.audit.passed);
  auto r2 = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), exact_sadp_oracle(), opt);
  CHECK(r2.implicit.values == r.implicit.values);
  auto o1 = run_mechanism(r.blueprint, {1}, ts, os, exact_sadp_oracle(), 11);
  auto o2 = run_mechanism(r.blueprint, {1}, ts, os, exact_sadp_oracle(), 11);
  CHECK(o1.outcome == o2.outcome);
  CHECK(o1.prices == o2.prices);
  CHECK_THROWS_AS(run_mechanism(r.blueprint, {2}, ts, os, exact_sadp_oracle(), 1), ValidationError);
}

TEST_CASE("mechanism runs follow the mixture") {
  TypeSpace ts = two_type_space();
  auto os = labelled(2);
  auto r = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), halved_sadp_oracle());
  const auto& blk = r.blueprint.blocks[0];
  std::vector<double> counts(blk.coefficients.size(), 0);
  const int runs = 10000;
  for (int t = 0; t < 2; ++t) {
    double value = 0;
    std::fill(counts.begin(), counts.end(), 0.0);
    for (int s = 0; s < runs; ++s) {
      auto o = run_mechanism(r.blueprint, {t}, ts, os, halved_sadp_oracle(), static_cast<std::uint64_t>(s));
      counts[o.direction] += 1;
      value += to_double(ts.type(0, t)(o.outcome));
    }
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const double c = to_double(blk.coefficients[j]);
      CHECK(std::abs(counts[j] / runs - c) <= 3 * std::sqrt(c * (1 - c) / runs) + 1e-12);
    }
    const double pi = to_double(r.implicit.pi(0, t, t)) * 2;  // original scale
    CHECK(std::abs(value / runs - pi) <= 3 * 2.0 / std::sqrt(runs));
  }
}

TEST_CASE("ellipsoid engine on the single type instance") {
  TypeSpace ts({BidderTypes{{table({{1, 1}})}, {Rational(1)}}});
  auto os = labelled(1);
  MdmdpOptions opt;
  opt.engine = LpEngine::kEllipsoid;
  opt.ellipsoid.precision_bits = 96;
  opt.ellipsoid.value_tolerance = Rational(1, 1000000);
  opt.ellipsoid.slack = Rational(1, 1000000000);
  opt.wso.tol_decomp = Rational(1, 1000);
  auto r = solve_mdmdp(ts, os, ObjectiveSpec::revenue(1), exact_sadp_oracle(), opt);
  CHECK(to_double(r.objective) >= 1 - 1e-5);
}
