#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mechkit/hardness.hpp"
#include "test_support.hpp"

using namespace mechkit;
using namespace mechkit::testing;

TEST_CASE("value oracle examples") {
  auto fam = planted_family(3, {0b001, 0b110});
  CHECK(value_oracle(fam, 2, 0b100) == 5);
  CHECK(value_oracle(fam, 2, 0b001) == Rational(17, 4));
  CHECK(value_oracle(fam, 2, 0b110) == 8 - 1 + Rational(2, 4));
  CHECK(value_oracle(fam, 1, 0b110) == 8);
  for (int i = 0; i <= 2; ++i) CHECK(value_oracle(fam, i, 0) == 0);
  CHECK(base_value(3, 0b111) == 9);
  CHECK_THROWS_AS(value_oracle(fam, 3, 0), ValidationError);
}

TEST_CASE("value deficit is confined to planted sets") {
  auto fam = random_planted_family(6, 8, 3);
  for (int i = 0; i <= fam.k(); ++i) {
    for (OutcomeId S = 0; S < 64; ++S) {
      const Rational deficit = base_value(6, S) - value_oracle(fam, i, S);
      auto it = std::find(fam.planted.begin(), fam.planted.end(), S);
      const bool hit = it != fam.planted.end() && it - fam.planted.begin() < i;
      if (hit) {
        CHECK(deficit > 0);
        CHECK(deficit <= 1);
      } else {
        CHECK(deficit == 0);
      }
    }
  }
}

TEST_CASE("family validation") {
  CHECK_THROWS_AS(planted_family(3, {0b011, 0b001}), ValidationError);
  CHECK_THROWS_AS(planted_family(3, {0b001, 0b001}), ValidationError);
  CHECK_THROWS_AS(planted_family(2, {0b100}), ValidationError);
  auto fam = random_planted_family(5, 7, 1);
  CHECK(fam.k() == 7);
  for (int j = 1; j < fam.k(); ++j) {
    CHECK(subset_rank(5, fam.planted[static_cast<std::size_t>(j - 1)]) <
          subset_rank(5, fam.planted[static_cast<std::size_t>(j)]));
  }
  CHECK(random_planted_family(5, 7, 1).planted == fam.planted);
  CHECK(random_planted_family(2, 4, 9).k() == 4);
}

TEST_CASE("subset rank examples") {
  CHECK(subset_rank(3, 0) == 1);
  CHECK(subset_rank(3, 0b001) == 2);
  CHECK(subset_rank(3, 0b010) == 3);
  CHECK(subset_rank(3, 0b011) == 5);
  CHECK(subset_rank(3, 0b111) == 8);
  CHECK_THROWS_AS(subset_unrank(3, 0), ValidationError);
  CHECK_THROWS_AS(subset_unrank(3, 9), ValidationError);
}

TEST_CASE("subset rank is a size monotone bijection") {
  for (int n = 0; n <= 10; ++n) {
    std::vector<bool> seen((std::size_t{1} << n) + 1, false);
    for (OutcomeId S = 0; S < (OutcomeId{1} << n); ++S) {
      const auto r = subset_rank(n, S);
      REQUIRE(r >= 1);
      REQUIRE(r <= (std::uint64_t{1} << n));
      CHECK_FALSE(seen[r]);
      seen[r] = true;
      CHECK(subset_unrank(n, r) == S);
    }
    for (std::uint64_t r = 2; r <= (std::uint64_t{1} << n); ++r) {
      CHECK(std::popcount(subset_unrank(n, r - 1)) <= std::popcount(subset_unrank(n, r)));
    }
  }
}

TEST_CASE("demand oracle examples") {
  auto fam = planted_family(3, {0b100});
  const std::vector<Rational> p{Rational(1, 10), Rational(1, 5), Rational(5)};
  CHECK(demand_oracle(fam, 0, p) == 0b011);
  CHECK(demand_by_enumeration(fam, 0, p) == 0b011);
  CHECK(demand_oracle(fam, 1, std::vector<Rational>(3, Rational(0))) == 0b111);
  auto full = planted_family(3, {0b111});
  CHECK(demand_oracle(full, 1, std::vector<Rational>(3, Rational(0))) == 0b111);
}

TEST_CASE("demand oracle matches enumeration on random draws") {
  std::mt19937_64 rng(21);
  for (int draw = 0; draw < 500; ++draw) {
    const int n = 1 + static_cast<int>(rng() % 12);
    auto p = random_prices(rng, n);
    PlantedFamily fam;
    if (draw % 2) {
      fam = adversarial_family(rng, n, p);
    } else {
      const int kmax = static_cast<int>(std::min<std::uint64_t>(8, std::uint64_t{1} << n));
      fam = random_planted_family(n, 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(kmax)), rng());
    }
    const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(fam.k() + 1));
    CAPTURE(draw);
    CHECK(demand_oracle(fam, i, p) == demand_by_enumeration(fam, i, p));
  }
}

TEST_CASE("planted functions are monotone submodular") {
  for (int n = 1; n <= 8; ++n) {
    const int k = static_cast<int>(std::min<std::uint64_t>(5, std::uint64_t{1} << n));
    auto fam = random_planted_family(n, k, static_cast<std::uint64_t>(n));
    for (int i = 0; i <= k; ++i) {
      auto rep = submodularity_test(fam, i, CheckMode::kExhaustive);
      CHECK(rep.ok());
      CHECK(rep.checked > 0);
    }
  }
  auto big = random_planted_family(20, 30, 5);
  auto rep = submodularity_test(big, 30, CheckMode::kRandom, 20000, 5);
  CHECK(rep.ok());
  CHECK(rep.checked > 10000);
}

TEST_CASE("a corrupted bonus is caught") {
  auto fam = planted_family(4, {0b0001, 0b0111});
  fam.corrupt_bonus = Rational(2);
  auto rep = submodularity_test(fam, 2, CheckMode::kExhaustive);
  CHECK_FALSE(rep.ok());
  // X = {1}, Y = {1,2}, x = 3: 12 - 9 = 3 < 17 - 12 = 5.
  const auto triple = std::make_tuple(OutcomeId{0b0001}, OutcomeId{0b0011}, 3);
  CHECK(std::find(rep.diminishing_violations.begin(), rep.diminishing_violations.end(), triple) !=
        rep.diminishing_violations.end());
  CHECK_FALSE(submodularity_test(fam, 2, CheckMode::kRandom, 20000, 1).ok());
}

TEST_CASE("planted optimum matches brute force") {
  std::mt19937_64 rng(31);
  for (int n = 2; n <= 10; ++n) {
    const int k = static_cast<int>(std::min<std::uint64_t>(4, std::uint64_t{1} << n));
    auto fam = random_planted_family(n, k, rng());
    auto fs = planted_functions(fam);
    for (int i = 1; i < k; ++i) {
      auto [set, value] = planted_optimum(fam, i);
      CHECK(value == Rational(1, 2));
      CHECK(set == fam.planted[static_cast<std::size_t>(i)]);
      SadpInstance inst;
      inst.space = OutcomeSpace::subset_lattice(n);
      inst.fs = {fs[static_cast<std::size_t>(i - 1)], fs[static_cast<std::size_t>(i)]};
      CHECK(instance_value(inst, brute_force_sadp(inst)) == value);
      CHECK(difference(inst, 1, point_mass(set)) == value);
      for (OutcomeId S = 0; S < (OutcomeId{1} << n); ++S) {
        auto it = std::find(fam.planted.begin(), fam.planted.end(), S);
        const long j = it - fam.planted.begin() + 1;
        const Rational d = value_oracle(fam, i, S) - value_oracle(fam, i + 1, S);
        if (j <= i) {
          CHECK(d == Rational(j, 2 * i) - Rational(j, 2 * i + 2));
          CHECK(d < Rational(1, 2));
        } else if (j > i + 1) {
          CHECK(d == 0);
        }
      }
    }
  }
}

TEST_CASE("hard instance multipliers and prior") {
  auto Q = hardness_multipliers(4, 3);
  CHECK(Q == std::vector<Rational>{Rational(1), Rational(576), Rational(331776)});
  auto reduced = hard_mdmdp(planted_family(3, {0b001, 0b011}));
  CHECK(reduced.certificate.Q == std::vector<Rational>{Rational(1), Rational(144)});
  CHECK(reduced.types.prior(0, 0) == Rational(143, 144));
  CHECK(reduced.types.prior(0, 1) == Rational(1, 144));
  auto four = hard_mdmdp(random_planted_family(4, 3, 2));
  CHECK(four.certificate.Q == Q);
  CHECK(four.certificate.bits >= 19);
}

TEST_CASE("certificates verify at desk scale") {
  for (int n = 2; n <= 6; ++n) {
    for (int k = 2; k <= 4; ++k) {
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        CAPTURE(n);
        CAPTURE(k);
        auto fam = random_planted_family(n, k, seed);
        auto reduced = hard_mdmdp(fam);
        CHECK(reduced.certificate.report.ok);
        CHECK(reduced.certificate.report.windows.size() == static_cast<std::size_t>(k * (k + 1) / 2));
      }
      // The full set may be planted too.
      if (k - 1 >= n) continue;
      std::vector<OutcomeId> sets;
      for (int j = 0; j + 1 < k; ++j) sets.push_back(OutcomeId{1} << j);
      sets.push_back((OutcomeId{1} << n) - 1);
      CHECK(hard_mdmdp(planted_family(n, sets)).certificate.report.ok);
    }
  }
}
