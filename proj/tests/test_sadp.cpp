#include <random>

#include "doctest.h"
#include "mechkit/sadp.hpp"

using namespace mechkit;

namespace {

Valuation table(std::initializer_list<std::pair<const OutcomeId, Rational>> v) { return Valuation::table(v); }

SadpInstance two_outcome_instance() {
  SadpInstance inst;
  inst.space = OutcomeSpace::explicit_outcomes({"a", "b"});
  inst.fs.resize(2);
  inst.fs[0].add(1, table({{1, 1}, {2, 0}}));
  inst.fs[1].add(1, table({{1, 0}, {2, 1}}));
  return inst;
}

Rational random_q(std::mt19937_64& rng, int den = 8) {
  return Rational(static_cast<long>(rng() % (den + 1)), den);
}

TypeSpace random_two_type_space(std::mt19937_64& rng, int bidders, int outcomes) {
  std::vector<BidderTypes> bs;
  for (int i = 0; i < bidders; ++i) {
    BidderTypes b;
    for (int t = 0; t < 2; ++t) {
      std::map<OutcomeId, Rational> m;
      for (int x = 1; x <= outcomes; ++x) m[static_cast<OutcomeId>(x)] = random_q(rng);
      b.types.push_back(Valuation::table(m));
    }
    Rational p(static_cast<long>(1 + rng() % 3), 4);
    b.prior = {p, 1 - p};
    bs.push_back(std::move(b));
  }
  return TypeSpace(std::move(bs));
}

}  // namespace

TEST_CASE("identical functions give difference zero") {
  SadpInstance inst = two_outcome_instance();
  inst.fs[1] = inst.fs[0];
  auto sol = brute_force_sadp(inst);
  CHECK(difference(inst, 1, sol.allocation) == 0);
  CHECK(sol.allocation == point_mass(0));
}

TEST_CASE("two outcome instance picks a") {
  SadpInstance inst = two_outcome_instance();
  auto sol = brute_force_sadp(inst);
  CHECK(sol.allocation == point_mass(1));
  CHECK(difference(inst, 1, sol.allocation) == 1);
  CHECK(sol.achieved_index == 1);
  CHECK(certify_ratio(inst, sol, sol) == 1);
}

TEST_CASE("brute force respects the enumeration limit") {
  SadpInstance inst;
  inst.space = OutcomeSpace::subset_lattice(21);
  inst.fs.resize(2);
  CHECK_THROWS_AS(brute_force_sadp(inst), SizeError);
}

TEST_CASE("certify ratio of a half solution") {
  SadpInstance inst = two_outcome_instance();
  auto exact = brute_force_sadp(inst);
  SadpSolution half{mix(point_mass(1), Rational(1, 2), point_mass(0), Rational(1, 2)), std::nullopt, 1};
  CHECK(certify_ratio(inst, half, exact) == Rational(1, 2));
  SadpSolution bad{point_mass(2), std::nullopt, 1};
  CHECK(certify_ratio(inst, bad, exact) == 0);
}

TEST_CASE("halved oracle reaches exactly half") {
  SadpInstance inst = two_outcome_instance();
  auto h = halved_sadp_oracle()(inst);
  CHECK(h.allocation.size() == 2);
  CHECK(certify_ratio(inst, h, brute_force_sadp(inst)) == Rational(1, 2));
}

TEST_CASE("zero direction gives zero functions") {
  std::mt19937_64 rng(3);
  TypeSpace ts = random_two_type_space(rng, 2, 3);
  auto os = OutcomeSpace::explicit_outcomes({"x", "y", "z"});
  DirectionVector w(Layout(ts.type_counts(), false));
  auto inst = virtual_transform_revenue(w, {0, 1}, ts, os);
  REQUIRE(inst.fs.size() == 2);
  CHECK(inst.fs[0].empty());
  CHECK(inst.fs[1].empty());
}

TEST_CASE("single bidder transform coefficients are plus and minus two") {
  Valuation ta = table({{1, 1}}), tb = table({{2, 1}});
  TypeSpace ts({BidderTypes{{ta, tb}, {Rational(1, 2), Rational(1, 2)}}});
  auto os = OutcomeSpace::explicit_outcomes({"A", "B"});
  DirectionVector w(Layout(ts.type_counts(), false));
  w.values(w.layout.pi_index(0, 0, 0)) = 1;
  w.values(w.layout.pi_index(0, 1, 0)) = -1;
  auto inst = virtual_transform_revenue(w, {0}, ts, os);
  REQUIRE(inst.fs[0].terms.size() == 1);
  REQUIRE(inst.fs[1].terms.size() == 1);
  CHECK(inst.fs[0].terms[0].first == 2);
  CHECK(inst.fs[1].terms[0].first == 2);
  CHECK(inst.fs[0](1) == 2);
  CHECK(inst.fs[0](2) == 0);
  CHECK(inst.fs[1](2) == 2);
  CHECK(!inst.general());
}

TEST_CASE("transform difference matches direct virtual welfare summation") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const int m = 2, outcomes = 4;
    TypeSpace ts = random_two_type_space(rng, m, outcomes);
    auto os = OutcomeSpace::explicit_outcomes({"a", "b", "c", "d"});
    DirectionVector w(Layout(ts.type_counts(), false));
    for (Eigen::Index k = 0; k < w.values.size(); ++k) w.values(k) = random_q(rng) - Rational(1, 2);
    std::vector<int> profile{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
    auto inst = virtual_transform_revenue(w, profile, ts, os);
    for (int trial = 0; trial < 50; ++trial) {
      Distribution X = canonical({{static_cast<OutcomeId>(rng() % (outcomes + 1)), Rational(1, 3)},
                                  {static_cast<OutcomeId>(rng() % (outcomes + 1)), Rational(2, 3)}});
      Rational direct(0);
      for (int i = 0; i < m; ++i) {
        for (int t = 0; t < 2; ++t) {
          direct += w.pi(i, t, profile[i]) / ts.prior(i, profile[i]) * ts.type(i, t).expect(X);
        }
      }
      CHECK(difference(inst, 1, X) == direct);
    }
  }
}

TEST_CASE("general transform clamps the objective weight") {
  std::mt19937_64 rng(5);
  TypeSpace ts = random_two_type_space(rng, 2, 2);
  auto os = OutcomeSpace::explicit_outcomes({"a", "b"});
  DirectionVector w(Layout(ts.type_counts(), true));
  w.values(w.layout.objective_index()) = Rational(-1, 2);
  w.values(w.layout.price_index(1, 1)) = Rational(1, 4);
  auto inst = virtual_transform_general(w, {0, 1}, ts, os, ObjectiveSpec::revenue(2));
  CHECK(*inst.c0 == 0);
  REQUIRE(inst.cs);
  CHECK((*inst.cs)[0] == 0);
  CHECK((*inst.cs)[1] == Rational(1, 4) / ts.prior(1, 1));
  REQUIRE(inst.gs);
  CHECK(inst.gs->size() == 2);

  w.values(w.layout.objective_index()) = Rational(1, 3);
  inst = virtual_transform_general(w, {0, 1}, ts, os, ObjectiveSpec::revenue(2));
  CHECK(*inst.c0 == Rational(1, 3));
}

TEST_CASE("allocation-only objective drops price terms") {
  std::mt19937_64 rng(6);
  TypeSpace ts = random_two_type_space(rng, 2, 2);
  auto os = OutcomeSpace::explicit_outcomes({"a", "b"});
  DirectionVector w(Layout(ts.type_counts(), true));
  w.values(w.layout.price_index(0, 0)) = 1;
  auto inst = virtual_transform_general(w, {0, 0}, ts, os, ObjectiveSpec::welfare(2));
  CHECK(!inst.cs);
  auto sol = brute_force_sadp(inst);
  CHECK(sol.prices);
}

TEST_CASE("general brute force charges bidders with positive price weight") {
  SadpInstance inst = two_outcome_instance();
  inst.gs = std::vector<Valuation>{table({{1, 1}}), table({{2, 1}})};
  inst.cs = std::vector<Rational>{Rational(1, 2), Rational(-1, 3)};
  inst.c0 = Rational(0);
  inst.objective = ObjectiveSpec::revenue(2);
  auto sol = brute_force_sadp(inst);
  REQUIRE(sol.prices);
  CHECK((*sol.prices)[0] == 1);
  CHECK((*sol.prices)[1] == 0);
  CHECK(instance_value(inst, sol) == Rational(3, 2));
}

TEST_CASE("revenue objective weight shifts the price threshold") {
  SadpInstance inst = two_outcome_instance();
  inst.gs = std::vector<Valuation>{table({{1, 1}}), table({{2, 1}})};
  inst.cs = std::vector<Rational>{Rational(-1, 2), Rational(-2)};
  inst.c0 = Rational(1);
  inst.objective = ObjectiveSpec::revenue(2);
  auto sol = brute_force_sadp(inst);
  CHECK((*sol.prices)[0] == 1);
  CHECK((*sol.prices)[1] == 0);
  CHECK(instance_value(inst, sol) == Rational(3, 2));
}

TEST_CASE("fmmf objective splits a single item") {
  SadpInstance inst;
  inst.space = OutcomeSpace::explicit_outcomes({"to1", "to2"});
  inst.fs.resize(2);
  inst.gs = std::vector<Valuation>{table({{1, 1}}), table({{2, 1}})};
  inst.c0 = Rational(1);
  inst.objective = ObjectiveSpec::fmmf(2);
  auto sol = brute_force_sadp(inst);
  CHECK(sol.allocation == Distribution{{1, Rational(1, 2)}, {2, Rational(1, 2)}});
  CHECK(instance_value(inst, sol) == Rational(1, 2));
  auto half = halved_sadp_oracle()(inst);
  CHECK(certify_ratio(inst, half, sol) == Rational(1, 2));
}

TEST_CASE("derandomize leaves deterministic oracles unchanged") {
  SadpOracle g = exact_sadp_oracle();
  SadpOracle gp = derandomize(g, 7, 99);
  SadpInstance inst = two_outcome_instance();
  CHECK(gp(inst).allocation == g(inst).allocation);
  CHECK(!gp.randomized);
}

TEST_CASE("derandomize a coin-flip oracle") {
  SadpOracle coin;
  coin.randomized = true;
  coin.alpha = 1;
  coin.name = "coin";
  coin.solver = [](const SadpInstance& inst, CounterRng& rng) {
    if (rng() & 1) return brute_force_sadp(inst);
    return SadpSolution{point_mass(0), std::nullopt, 1};
  };
  SadpOracle gp = derandomize(coin, 20, 1234);
  SadpInstance inst = two_outcome_instance();
  auto a = gp(inst);
  auto b = gp(inst);
  CHECK(a.allocation == point_mass(1));
  CHECK(a.allocation == b.allocation);
  CHECK(instance_digest_text(inst) == instance_digest_text(two_outcome_instance()));
  SadpOracle gpp = derandomize(gp, 20, 1234);
  CHECK(gpp(inst).allocation == a.allocation);
}

TEST_CASE("brute force is certified exact on random instances") {
  std::mt19937_64 rng(21);
  auto os = OutcomeSpace::subset_lattice(3);
  for (int rep = 0; rep < 20; ++rep) {
    SadpInstance inst;
    inst.space = os;
    inst.fs.resize(2);
    for (int j = 0; j < 2; ++j) {
      MatrixQ a(1, 3);
      for (int k = 0; k < 3; ++k) a(0, k) = random_q(rng);
      inst.fs[static_cast<std::size_t>(j)].add(random_q(rng) + 1, Valuation::additive(a));
    }
    auto sol = brute_force_sadp(inst);
    Rational best(0);
    for (OutcomeId x : os.enumerate()) best = std::max(best, difference(inst, 1, point_mass(x)));
    CHECK(difference(inst, 1, sol.allocation) == best);
    CHECK(certify_ratio(inst, sol, sol) == 1);
  }
}
