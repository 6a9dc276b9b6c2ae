#include <random>

#include "doctest.h"
#include "mechkit/fmmf.hpp"
#include "mechkit/lp.hpp"

using namespace mechkit;

namespace {

MatrixQ mat(int m, int n, std::initializer_list<long> vals) {
  MatrixQ a(m, n);
  auto it = vals.begin();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = *it++;
  }
  return a;
}

MatrixQ random_matrix(std::mt19937_64& rng, int m, int n, int lo, int hi, int den) {
  std::uniform_int_distribution<int> u(lo, hi);
  MatrixQ a(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Rational(u(rng), den);
  }
  return a;
}

Rational brute_best(const MatrixQ& w, const SetFamily& f) {
  Rational best(0);
  const OutcomeId all = OutcomeId{1} << (f.rows * f.cols);
  for (OutcomeId s = 0; s < all; ++s) {
    if (f.contains(s)) best = std::max(best, set_weight(w, s, f.cols));
  }
  return best;
}

// Dense LP over the convex hull of all family members.
Rational dense_fmmf_optimum(const std::vector<MatrixQ>& gs, const MatrixQ& f, const MatrixQ& fp, const Rational& c0,
                            const SetFamily& fam) {
  std::vector<OutcomeId> sets;
  const OutcomeId all = OutcomeId{1} << (fam.rows * fam.cols);
  for (OutcomeId s = 0; s < all; ++s) {
    if (fam.contains(s)) sets.push_back(s);
  }
  const auto k = static_cast<Eigen::Index>(sets.size());
  LinearProgram<Rational> lp(k + 1);
  lp.lower[static_cast<std::size_t>(k)] = std::nullopt;
  for (Eigen::Index s = 0; s < k; ++s) {
    lp.objective(s) = set_weight(f, sets[static_cast<std::size_t>(s)], fam.cols) -
                      set_weight(fp, sets[static_cast<std::size_t>(s)], fam.cols);
  }
  lp.objective(k) = c0;
  VectorQ sum = lp.zero_row();
  sum.head(k).setOnes();
  lp.add_row(sum, Sense::kEqual, Rational(1));
  for (const auto& g : gs) {
    VectorQ row = lp.zero_row();
    row(k) = 1;
    for (Eigen::Index s = 0; s < k; ++s) row(s) = -set_weight(g, sets[static_cast<std::size_t>(s)], fam.cols);
    lp.add_row(row, Sense::kLessEqual, Rational(0));
  }
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  return r.value;
}

SadpInstance fmmf_instance(const std::vector<MatrixQ>& gs, const MatrixQ& f, const MatrixQ& fp, const Rational& c0,
                           const SetFamily& fam) {
  SadpInstance inst;
  inst.space = fam.space();
  inst.fs.resize(2);
  inst.fs[0].add(1, Valuation::additive(f));
  inst.fs[1].add(1, Valuation::additive(fp));
  std::vector<Valuation> g;
  for (const auto& m : gs) g.push_back(Valuation::additive(m));
  inst.gs = g;
  inst.c0 = c0;
  inst.objective = ObjectiveSpec::fmmf(static_cast<int>(gs.size()));
  return inst;
}

}  // namespace

TEST_CASE("non-positive weights select the empty set") {
  MaxWeightOracle o{SetFamily::matching(2, 3)};
  MatrixQ w = mat(2, 3, {0, -1, -2, -3, 0, -1});
  CHECK(max_weight(w, o) == 0);
  MaxWeightOracle u{SetFamily::uniform_matroid(3, 2)};
  CHECK(max_weight(mat(1, 3, {-1, 0, -5}), u) == 0);
}

TEST_CASE("two by two matching example") {
  MaxWeightOracle o{SetFamily::matching(2, 2)};
  MatrixQ w = mat(2, 2, {3, 1, 2, 4});
  OutcomeId s = max_weight(w, o);
  CHECK(s == ((OutcomeId{1} << 0) | (OutcomeId{1} << 3)));
  CHECK(set_weight(w, s, 2) == 7);
  std::size_t count = 0;
  for (OutcomeId t = 0; t < 16; ++t) count += o.family.contains(t) ? 1 : 0;
  CHECK(count == 7);
}

TEST_CASE("uniform matroid greedy example") {
  MaxWeightOracle o{SetFamily::uniform_matroid(3, 2)};
  MatrixQ w = mat(1, 3, {5, 1, 4});
  OutcomeId s = max_weight(w, o);
  CHECK(s == 0b101);
  CHECK(set_weight(w, s, 3) == 9);
}

TEST_CASE("greedy equals enumeration on uniform matroids") {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 12; ++n) {
    for (int rank = 0; rank <= n; rank += 1 + n / 4) {
      MaxWeightOracle o{SetFamily::uniform_matroid(n, rank)};
      MatrixQ w = random_matrix(rng, 1, n, -5, 9, 3);
      OutcomeId s = max_weight(w, o);
      CHECK(o.family.contains(s));
      CHECK(set_weight(w, s, n) == brute_best(w, o.family));
    }
  }
}

TEST_CASE("greedy equals enumeration on partition matroids") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 8);
    std::vector<int> block(static_cast<std::size_t>(n));
    for (auto& b : block) b = static_cast<int>(rng() % 3);
    MaxWeightOracle o{SetFamily::partition_matroid(block, {1, 2, 0})};
    MatrixQ w = random_matrix(rng, 1, n, -3, 9, 2);
    OutcomeId s = max_weight(w, o);
    CHECK(o.family.contains(s));
    CHECK(set_weight(w, s, n) == brute_best(w, o.family));
  }
}

TEST_CASE("assignment equals brute force on small grids") {
  std::mt19937_64 rng(3);
  for (int m = 1; m <= 4; ++m) {
    for (int n = 1; n <= 4; ++n) {
      for (int rep = 0; rep < 8; ++rep) {
        MaxWeightOracle o{SetFamily::matching(m, n)};
        MatrixQ w = random_matrix(rng, m, n, -4, 12, 5);
        OutcomeId s = max_weight(w, o);
        CHECK(o.family.contains(s));
        CHECK(set_weight(w, s, n) == brute_best(w, o.family));
      }
    }
  }
}

TEST_CASE("explicit family enumeration") {
  MaxWeightOracle o{SetFamily::explicit_family(1, 3, {0b011, 0b110, 0b100})};
  CHECK(max_weight(mat(1, 3, {1, 1, 3}), o) == 0b110);
  CHECK(max_weight(mat(1, 3, {3, 1, 2}), o) == 0b011);
  CHECK(max_weight(mat(1, 3, {-1, -1, -3}), o) == 0);
}

TEST_CASE("fmmf value basics") {
  std::vector<MatrixQ> gs{mat(2, 1, {1, 0}), mat(2, 1, {0, 1})};
  CHECK(fmmf_value(gs, MatrixQ::Zero(2, 1)) == 0);
  MatrixQ half(2, 1);
  half << Rational(1, 2), Rational(1, 2);
  CHECK(fmmf_value(gs, half) == Rational(1, 2));
}

TEST_CASE("fmmf is concave along random segments") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<MatrixQ> gs;
    for (int i = 0; i < 3; ++i) gs.push_back(random_matrix(rng, 3, 2, 0, 6, 6));
    MatrixQ x1 = random_matrix(rng, 3, 2, 0, 4, 4), x2 = random_matrix(rng, 3, 2, 0, 4, 4);
    Rational c(static_cast<long>(rng() % 11), 10);
    CHECK(fmmf_value(gs, c * x1 + (1 - c) * x2) >= c * fmmf_value(gs, x1) + (1 - c) * fmmf_value(gs, x2));
  }
}

TEST_CASE("fmmf LP without objective weight is pure virtual welfare") {
  MatrixQ f = mat(1, 2, {3, 1}), fp = mat(1, 2, {1, 2});
  auto lp = build_fmmf_lp({mat(1, 2, {1, 1})}, f, fp, Rational(0));
  CHECK(lp.lp.objective(2) == 0);
  CHECK(lp.lp.objective(0) == 2);
  CHECK(lp.lp.objective(1) == -1);
  CHECK(lp.lp.rows.size() == 1);
}

TEST_CASE("single item shared by two bidders") {
  std::vector<MatrixQ> gs{mat(2, 1, {1, 0}), mat(2, 1, {0, 1})};
  MatrixQ zero = MatrixQ::Zero(2, 1);
  MaxWeightOracle G{SetFamily::matching(2, 1)};
  auto inst = fmmf_instance(gs, zero, zero, Rational(1), G.family);
  auto r = solve_sadp_fmmf(inst, G);
  CHECK(r.lp_value == Rational(1, 2));
  CHECK(r.marginals.x(0, 0) == Rational(1, 2));
  CHECK(r.marginals.x(1, 0) == Rational(1, 2));
  CHECK(r.marginals.reconstruct() == r.marginals.x);
  CHECK(r.solution.allocation == Distribution{{1, Rational(1, 2)}, {2, Rational(1, 2)}});
  CHECK(fmmf_value(gs, r.marginals.x) == Rational(1, 2));
  CHECK(instance_value(inst, r.solution) == Rational(1, 2));
}

TEST_CASE("single bidder gets the item") {
  std::vector<MatrixQ> gs{mat(1, 1, {1})};
  MatrixQ zero = MatrixQ::Zero(1, 1);
  MaxWeightOracle G{SetFamily::matching(1, 1)};
  auto r = solve_sadp_fmmf(fmmf_instance(gs, zero, zero, Rational(1), G.family), G);
  CHECK(r.solution.allocation == point_mass(1));
  CHECK(fmmf_value(gs, r.marginals.x) == 1);
}

TEST_CASE("fmmf pipeline matches the dense LP on random matching instances") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 12; ++rep) {
    const int m = 2, n = 2;
    MaxWeightOracle G{SetFamily::matching(m, n)};
    std::vector<MatrixQ> gs;
    for (int i = 0; i < m; ++i) {
      MatrixQ g = MatrixQ::Zero(m, n);
      g.row(i) = random_matrix(rng, 1, n, 0, 8, 8);
      gs.push_back(g);
    }
    MatrixQ f = random_matrix(rng, m, n, 0, 8, 8), fp = random_matrix(rng, m, n, 0, 8, 8);
    Rational c0(static_cast<long>(rng() % 4), 2);
    auto inst = fmmf_instance(gs, f, fp, c0, G.family);
    auto r = solve_sadp_fmmf(inst, G);
    Rational dense = dense_fmmf_optimum(gs, f, fp, c0, G.family);
    CHECK(abs_q(r.lp_value - dense) <= pow2(-40));
    CHECK(abs_q(instance_value(inst, r.solution) - dense) <= pow2(-40));
    for (const auto& [s, c] : r.solution.allocation) CHECK(G.family.contains(s));
    CHECK(r.marginals.reconstruct() == r.marginals.x);
    auto exact = brute_force_sadp(inst);
    CHECK(abs_q(instance_value(inst, exact) - dense) == 0);
  }
}

TEST_CASE("fmmf pipeline on a uniform matroid") {
  std::mt19937_64 rng(6);
  MaxWeightOracle G{SetFamily::uniform_matroid(4, 2)};
  std::vector<MatrixQ> gs{random_matrix(rng, 1, 4, 0, 6, 6), random_matrix(rng, 1, 4, 0, 6, 6)};
  MatrixQ f = random_matrix(rng, 1, 4, 0, 4, 4), fp = random_matrix(rng, 1, 4, 0, 4, 4);
  auto inst = fmmf_instance(gs, f, fp, Rational(2), G.family);
  auto r = solve_sadp_fmmf(inst, G);
  CHECK(abs_q(r.lp_value - dense_fmmf_optimum(gs, f, fp, Rational(2), G.family)) <= pow2(-40));
}

TEST_CASE("non-additive input is a representation error") {
  SadpInstance inst;
  inst.space = OutcomeSpace::matchings(1, 1);
  inst.fs.resize(2);
  inst.fs[0].add(1, Valuation::table({{1, 1}}));
  CHECK_THROWS_AS(solve_sadp_fmmf(inst, MaxWeightOracle{SetFamily::matching(1, 1)}), ValidationError);
}
