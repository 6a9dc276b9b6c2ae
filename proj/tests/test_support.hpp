#ifndef MECHKIT_TESTS_TEST_SUPPORT_HPP
#define MECHKIT_TESTS_TEST_SUPPORT_HPP

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <random>

#include "mechkit/hardness.hpp"
#include "mechkit/lp.hpp"
#include "mechkit/rational.hpp"

namespace mechkit::testing {

// Exact Gaussian elimination; empty result when A is singular.
inline std::optional<VectorQ> solve_exact(MatrixQ A, VectorQ b) {
  const Eigen::Index n = A.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    while (p < n && A(p, c) == 0) ++p;
    if (p == n) return std::nullopt;
    A.row(c).swap(A.row(p));
    std::swap(b(c), b(p));
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c || A(r, c) == 0) continue;
      Rational f = A(r, c) / A(c, c);
      A.row(r) -= f * A.row(c);
      b(r) -= f * b(c);
    }
  }
  VectorQ x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = b(i) / A(i, i);
  return x;
}

using Grid = std::vector<std::vector<Rational>>;

// Identity attains the maximum over all permutations.
inline bool identity_optimal(const Grid& w) {
  std::vector<int> perm(w.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rational diag(0);
  for (std::size_t r = 0; r < w.size(); ++r) diag += w[r][r];
  do {
    Rational s(0);
    for (std::size_t r = 0; r < w.size(); ++r) s += w[r][static_cast<std::size_t>(perm[r])];
    if (s > diag) return false;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return true;
}

inline Distribution alloc_or_null(const std::vector<Distribution>& xs, int l) {
  return l == 0 ? point_mass(0) : xs[static_cast<std::size_t>(l - 1)];
}

inline bool enumerated_cyclic(const std::vector<Valuation>& ts, const std::vector<Distribution>& xs) {
  Grid w(ts.size(), std::vector<Rational>(ts.size()));
  for (std::size_t r = 0; r < ts.size(); ++r) {
    for (std::size_t c = 0; c < ts.size(); ++c) w[r][c] = ts[r].expect(xs[c]);
  }
  return identity_optimal(w);
}

inline bool enumerated_compatible(const std::vector<Valuation>& ts, const std::vector<Distribution>& xs) {
  if (!enumerated_cyclic(ts, xs)) return false;
  const int k = static_cast<int>(ts.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j <= k; ++j) {
      Grid w;
      for (int r = i; r < j; ++r) {
        std::vector<Rational> row;
        for (int l = i; l < j; ++l) row.push_back(ts[static_cast<std::size_t>(r)].expect(alloc_or_null(xs, l)));
        w.push_back(std::move(row));
      }
      if (!identity_optimal(w)) return false;
    }
  }
  return true;
}

// Best BIC/IR revenue for a fixed allocation rule: maximise sum q_j p_j.
// Empty when no prices make the rule BIC.
inline std::optional<Rational> dense_price_optimum(const OrderedMenu& m) {
  const auto k = static_cast<Eigen::Index>(m.types.size());
  LinearProgram<Rational> lp(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    lp.lower[static_cast<std::size_t>(j)] = std::nullopt;
    lp.objective(j) = m.probabilities[static_cast<std::size_t>(j)];
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& t = m.types[static_cast<std::size_t>(j)];
    VectorQ ir = lp.zero_row();
    ir(j) = 1;
    lp.add_row(ir, Sense::kLessEqual, t.expect(m.allocations[static_cast<std::size_t>(j)]));
    for (Eigen::Index l = 0; l < k; ++l) {
      if (l == j) continue;
      VectorQ bic = lp.zero_row();
      bic(j) = 1;
      bic(l) = -1;
      lp.add_row(bic, Sense::kLessEqual,
                 t.expect(m.allocations[static_cast<std::size_t>(j)]) - t.expect(m.allocations[static_cast<std::size_t>(l)]));
    }
  }
  auto r = solve_lp(lp);
  if (r.status == LpStatus::kInfeasible) return std::nullopt;
  if (r.status != LpStatus::kOptimal) throw ContractError("price LP is unbounded");
  return r.value;
}

inline OrderedMenu random_menu(std::mt19937_64& rng) {
  OrderedMenu m;
  const int k = 2 + static_cast<int>(rng() % 2);
  Rational left(1);
  for (int j = 0; j < k; ++j) {
    std::map<OutcomeId, Rational> v;
    for (OutcomeId x = 1; x <= 3; ++x) v[x] = Rational(static_cast<long>(rng() % 5), 4);
    m.types.push_back(Valuation::table(v));
    const OutcomeId a = 1 + rng() % 3, b = 1 + rng() % 3;
    const Rational c(static_cast<long>(rng() % 3), 2);
    m.allocations.push_back(canonical(mix(point_mass(a), c, point_mass(b), 1 - c)));
    const Rational q = j + 1 == k ? left : left * Rational(static_cast<long>(1 + rng() % 3), 4);
    m.probabilities.push_back(q);
    left -= q;
  }
  return m;
}

inline std::vector<Rational> random_prices(std::mt19937_64& rng, int n) {
  std::vector<Rational> p;
  for (int j = 0; j < n; ++j) p.emplace_back(static_cast<long>(rng() % static_cast<std::uint64_t>(4 * n + 1)), 2);
  return p;
}

// Plants the cheapest set of a few sizes so the greedy candidate is always perturbed.
inline PlantedFamily adversarial_family(std::mt19937_64& rng, int n, const std::vector<Rational>& p) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[static_cast<std::size_t>(a)] < p[static_cast<std::size_t>(b)]; });
  std::vector<OutcomeId> sets;
  OutcomeId S = 0;
  for (int s = 0; s <= n; ++s) {
    if (s > 0) S |= OutcomeId{1} << order[static_cast<std::size_t>(s - 1)];
    if (rng() % 2) sets.push_back(S);
    if (s > 0 && rng() % 2) {
      // The second cheapest set of this size.
      const OutcomeId alt = s < n ? (S & ~(OutcomeId{1} << order[static_cast<std::size_t>(s - 1)])) |
                                        (OutcomeId{1} << order[static_cast<std::size_t>(s)])
                                  : S;
      if (std::find(sets.begin(), sets.end(), alt) == sets.end()) sets.push_back(alt);
    }
  }
  if (sets.empty()) sets.push_back(0);
  return planted_family(n, sets);
}

}  // namespace mechkit::testing

#endif  // MECHKIT_TESTS_TEST_SUPPORT_HPP
