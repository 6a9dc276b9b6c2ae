#include "mechkit/maxweight.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace mechkit {

namespace {

OutcomeId bit(int i, int j, int cols) { return OutcomeId{1} << (i * cols + j); }

void check_grid(int m, int n) {
  if (m < 1 || n < 0 || m * n > 63) throw ValidationError("set family needs 1 <= m*n <= 63");
}

}  // namespace

SetFamily SetFamily::matching(int m, int n) {
  check_grid(m, n);
  SetFamily f;
  f.kind = Kind::kBipartiteMatching;
  f.rows = m;
  f.cols = n;
  return f;
}

SetFamily SetFamily::uniform_matroid(int ground, int rank) {
  check_grid(1, ground);
  if (rank < 0) throw ValidationError("matroid rank must be non-negative");
  SetFamily f;
  f.kind = Kind::kUniformMatroid;
  f.cols = ground;
  f.rank = rank;
  return f;
}

SetFamily SetFamily::partition_matroid(std::vector<int> block, std::vector<int> capacities) {
  check_grid(1, static_cast<int>(block.size()));
  for (int b : block) {
    if (b < 0 || b >= static_cast<int>(capacities.size())) throw ValidationError("partition block out of range");
  }
  SetFamily f;
  f.kind = Kind::kPartitionMatroid;
  f.cols = static_cast<int>(block.size());
  f.block = std::move(block);
  f.capacities = std::move(capacities);
  return f;
}

SetFamily SetFamily::explicit_family(int m, int n, std::vector<OutcomeId> sets) {
  check_grid(m, n);
  SetFamily f;
  f.kind = Kind::kExplicit;
  f.rows = m;
  f.cols = n;
  for (OutcomeId s : sets) {
    if (s >> (m * n)) throw ValidationError("explicit set uses cells outside the grid");
  }
  f.sets = std::move(sets);
  return f;
}

bool SetFamily::contains(OutcomeId s) const {
  if (s >> (rows * cols)) return false;
  switch (kind) {
    case Kind::kBipartiteMatching:
      for (int i = 0; i < rows; ++i) {
        if (std::popcount((s >> (i * cols)) & ((OutcomeId{1} << cols) - 1)) > 1) return false;
      }
      for (int j = 0; j < cols; ++j) {
        int c = 0;
        for (int i = 0; i < rows; ++i) c += (s & bit(i, j, cols)) ? 1 : 0;
        if (c > 1) return false;
      }
      return true;
    case Kind::kUniformMatroid:
      return std::popcount(s) <= rank;
    case Kind::kPartitionMatroid: {
      std::vector<int> used(capacities.size(), 0);
      for (int j = 0; j < cols; ++j) {
        if ((s & bit(0, j, cols)) && ++used[static_cast<std::size_t>(block[static_cast<std::size_t>(j)])] >
                                         capacities[static_cast<std::size_t>(block[static_cast<std::size_t>(j)])]) {
          return false;
        }
      }
      return true;
    }
    case Kind::kExplicit:
      return s == 0 || std::find(sets.begin(), sets.end(), s) != sets.end();
  }
  return false;
}

std::string SetFamily::name() const {
  switch (kind) {
    case Kind::kBipartiteMatching:
      return "matching";
    case Kind::kUniformMatroid:
      return "uniform_matroid";
    case Kind::kPartitionMatroid:
      return "partition_matroid";
    case Kind::kExplicit:
      return "explicit";
  }
  return "unknown";
}

OutcomeSpace SetFamily::space() const {
  if (kind == Kind::kBipartiteMatching) return OutcomeSpace::matchings(rows, cols);
  SetFamily copy = *this;
  return OutcomeSpace::bipartite_grid(rows, std::max(cols, 1), [copy](OutcomeId s) { return copy.contains(s); }, name());
}

Rational set_weight(const MatrixQ& weights, OutcomeId s, int cols) {
  Rational total(0);
  while (s) {
    const int b = std::countr_zero(s);
    total += weights(b / cols, b % cols);
    s &= s - 1;
  }
  return total;
}

OutcomeId max_weight_matching(const MatrixQ& weights) {
  const int m = static_cast<int>(weights.rows());
  const int n = static_cast<int>(weights.cols());
  const int N = std::max(m, n);
  if (N == 0) return 0;
  // Minimisation form: cost = -max(w, 0), padded with zeros; 1-based arrays.
  auto cost = [&](int i, int j) -> Rational {
    if (i > m || j > n) return Rational(0);
    const Rational& w = weights(i - 1, j - 1);
    return w > 0 ? Rational(-w) : Rational(0);
  };
  std::vector<Rational> u(static_cast<std::size_t>(N + 1)), v(static_cast<std::size_t>(N + 1));
  std::vector<int> p(static_cast<std::size_t>(N + 1), 0), way(static_cast<std::size_t>(N + 1), 0);
  for (int i = 1; i <= N; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<std::optional<Rational>> minv(static_cast<std::size_t>(N + 1));
    std::vector<char> used(static_cast<std::size_t>(N + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      std::optional<Rational> delta;
      int j1 = 0;
      for (int j = 1; j <= N; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        Rational cur = cost(i0, j) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        auto& mv = minv[static_cast<std::size_t>(j)];
        if (!mv || cur < *mv) {
          mv = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (!delta || *mv < *delta) {
          delta = *mv;
          j1 = j;
        }
      }
      for (int j = 0; j <= N; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += *delta;
          v[static_cast<std::size_t>(j)] -= *delta;
        } else {
          *minv[static_cast<std::size_t>(j)] -= *delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  OutcomeId s = 0;
  for (int j = 1; j <= n; ++j) {
    const int i = p[static_cast<std::size_t>(j)];
    if (i >= 1 && i <= m && weights(i - 1, j - 1) > 0) s |= bit(i - 1, j - 1, n);
  }
  return s;
}

namespace {

std::vector<int> positive_by_weight(const MatrixQ& weights) {
  std::vector<int> order;
  for (int j = 0; j < static_cast<int>(weights.cols()); ++j) {
    if (weights(0, j) > 0) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weights(0, a) > weights(0, b); });
  return order;
}

}  // namespace

OutcomeId max_weight(const MatrixQ& weights, const MaxWeightOracle& oracle) {
  const SetFamily& f = oracle.family;
  if (weights.rows() != f.rows || weights.cols() != f.cols) throw DimensionError("weight matrix does not match the family grid");
  switch (f.kind) {
    case SetFamily::Kind::kBipartiteMatching:
      return max_weight_matching(weights);
    case SetFamily::Kind::kUniformMatroid: {
      OutcomeId s = 0;
      int taken = 0;
      for (int j : positive_by_weight(weights)) {
        if (taken++ == f.rank) break;
        s |= bit(0, j, f.cols);
      }
      return s;
    }
    case SetFamily::Kind::kPartitionMatroid: {
      OutcomeId s = 0;
      std::vector<int> used(f.capacities.size(), 0);
      for (int j : positive_by_weight(weights)) {
        const auto b = static_cast<std::size_t>(f.block[static_cast<std::size_t>(j)]);
        if (used[b] < f.capacities[b]) {
          ++used[b];
          s |= bit(0, j, f.cols);
        }
      }
      return s;
    }
    case SetFamily::Kind::kExplicit: {
      OutcomeId best = 0;
      Rational best_w(0);
      for (OutcomeId s : f.sets) {
        Rational w = set_weight(weights, s, f.cols);
        if (w > best_w) {
          best_w = w;
          best = s;
        }
      }
      return best;
    }
  }
  return 0;
}

VectorQ indicator(OutcomeId s, int rows, int cols) {
  VectorQ v = VectorQ::Zero(static_cast<Eigen::Index>(rows) * cols);
  while (s) {
    v(std::countr_zero(s)) = 1;
    s &= s - 1;
  }
  return v;
}

DirectionOracle marginal_direction_oracle(const MaxWeightOracle& oracle) {
  DirectionOracle A;
  const int m = oracle.family.rows, n = oracle.family.cols;
  A.dim = static_cast<Eigen::Index>(m) * n;
  A.alpha = oracle.alpha;
  A.bit_bound = 2;
  A.evaluate = [oracle, m, n](const VectorQ& w) {
    MatrixQ W(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) W(i, j) = w(i * n + j);
    }
    return indicator(max_weight(W, oracle), m, n);
  };
  return A;
}

}  // namespace mechkit
