#include "mechkit/hardness.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <set>
#include <tuple>
#include <unordered_set>

namespace mechkit {

namespace {

using Binomials = std::array<std::array<std::uint64_t, 64>, 64>;

const Binomials& binomials() {
  static const Binomials table = [] {
    Binomials c{};
    for (int a = 0; a < 64; ++a) {
      c[static_cast<std::size_t>(a)][0] = 1;
      for (int b = 1; b <= a; ++b) {
        c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            c[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b - 1)] +
            (b < a ? c[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b)] : 0);
      }
    }
    return c;
  }();
  return table;
}

std::uint64_t choose(int a, int b) {
  if (b < 0 || a < 0 || b > a) return 0;
  return binomials()[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

void check_n(int n) {
  if (n < 0 || n > 62) throw ValidationError("planted families need 0 <= n <= 62");
}

OutcomeId full_mask(int n) { return n == 0 ? 0 : (OutcomeId{1} << n) - 1; }

}  // namespace

std::uint64_t subset_rank(int n, OutcomeId S) {
  check_n(n);
  if (S & ~full_mask(n)) throw ValidationError("subset has items outside [n]");
  const int s = std::popcount(S);
  std::uint64_t r = 1;
  for (int j = 0; j < s; ++j) r += choose(n, j);
  int prev = 0, p = 0;
  for (int v = 1; v <= n; ++v) {
    if (!(S & (OutcomeId{1} << (v - 1)))) continue;
    for (int u = prev + 1; u < v; ++u) r += choose(n - u, s - p - 1);
    prev = v;
    ++p;
  }
  return r;
}

OutcomeId subset_unrank(int n, std::uint64_t r) {
  check_n(n);
  if (r < 1 || r > (std::uint64_t{1} << n)) throw ValidationError("rank out of range");
  std::uint64_t off = r - 1;
  int s = 0;
  while (off >= choose(n, s)) off -= choose(n, s++);
  OutcomeId S = 0;
  int need = s;
  for (int v = 1; v <= n && need > 0; ++v) {
    const std::uint64_t c = choose(n - v, need - 1);
    if (off < c) {
      S |= OutcomeId{1} << (v - 1);
      --need;
    } else {
      off -= c;
    }
  }
  return S;
}

PlantedFamily planted_family(int n, std::vector<OutcomeId> planted) {
  check_n(n);
  if (planted.size() > (std::size_t{1} << n)) throw ValidationError("more planted sets than subsets");
  std::set<OutcomeId> seen;
  for (std::size_t j = 0; j < planted.size(); ++j) {
    if (planted[j] & ~full_mask(n)) throw ValidationError("planted set has items outside [n]");
    if (!seen.insert(planted[j]).second) throw ValidationError("planted sets must be distinct");
    if (j > 0 && std::popcount(planted[j - 1]) > std::popcount(planted[j])) {
      throw ValidationError("planted sets must be ordered by size");
    }
  }
  PlantedFamily f;
  f.n = n;
  f.planted = std::move(planted);
  return f;
}

PlantedFamily random_planted_family(int n, int k, std::uint64_t seed) {
  check_n(n);
  if (k < 1 || static_cast<std::uint64_t>(k) > (std::uint64_t{1} << n)) throw ValidationError("need 1 <= k <= 2^n");
  CounterRng rng = CounterRng(seed).split(0x7u);
  std::set<OutcomeId> chosen;
  while (static_cast<int>(chosen.size()) < k) chosen.insert(rng() & full_mask(n));
  std::vector<OutcomeId> sets(chosen.begin(), chosen.end());
  std::sort(sets.begin(), sets.end(), [n](OutcomeId a, OutcomeId b) { return subset_rank(n, a) < subset_rank(n, b); });
  return planted_family(n, std::move(sets));
}

Rational base_value(int n, OutcomeId S) {
  const long s = std::popcount(S);
  return Rational(2L * n * s - s * s);
}

Rational value_oracle(const PlantedFamily& fam, int i, OutcomeId S) {
  if (i < 0 || i > fam.k()) throw ValidationError("function index out of range");
  Rational v = base_value(fam.n, S);
  for (int j = 1; j <= i; ++j) {
    if (fam.planted[static_cast<std::size_t>(j - 1)] == S) {
      if (fam.corrupt_bonus) return v + *fam.corrupt_bonus;
      return v - 1 + Rational(j, 2 * i);
    }
  }
  return v;
}

namespace {

Rational price_of(OutcomeId S, const std::vector<Rational>& prices) {
  Rational p(0);
  for (OutcomeId b = S; b; b &= b - 1) p += prices[static_cast<std::size_t>(std::countr_zero(b))];
  return p;
}

bool planted_hit(const PlantedFamily& fam, int i, OutcomeId S) {
  for (int j = 1; j <= i; ++j) {
    if (fam.planted[static_cast<std::size_t>(j - 1)] == S) return true;
  }
  return false;
}

struct Best {
  std::optional<Rational> utility;
  std::uint64_t rank = 0;
  OutcomeId set = 0;

  void offer(const Rational& u, std::uint64_t r, OutcomeId S) {
    if (!utility || u > *utility || (u == *utility && r < rank)) {
      utility = u;
      rank = r;
      set = S;
    }
  }
};

}  // namespace

OutcomeId demand_oracle(const PlantedFamily& fam, int i, const std::vector<Rational>& prices) {
  const int n = fam.n;
  if (static_cast<int>(prices.size()) != n) throw DimensionError("one price per item is required");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return prices[static_cast<std::size_t>(a)] < prices[static_cast<std::size_t>(b)]; });

  Best best;
  auto offer = [&](OutcomeId S) { best.offer(value_oracle(fam, i, S) - price_of(S, prices), subset_rank(n, S), S); };
  for (int s = 0; s <= n; ++s) {
    // Best-first over s-subsets in (price, rank) order; swaps towards cheaper
    // items reach every set from a predecessor, so the order is exact.
    OutcomeId start = 0;
    for (int p = 0; p < s; ++p) start |= OutcomeId{1} << order[static_cast<std::size_t>(p)];
    using Key = std::tuple<Rational, std::uint64_t, OutcomeId>;
    std::set<Key> frontier{{price_of(start, prices), subset_rank(n, start), start}};
    std::unordered_set<OutcomeId> visited{start};
    while (!frontier.empty()) {
      const auto [cost, rank, S] = *frontier.begin();
      frontier.erase(frontier.begin());
      offer(S);
      if (!planted_hit(fam, i, S)) break;
      for (OutcomeId in = S; in; in &= in - 1) {
        const int a = std::countr_zero(in);
        for (int b = 0; b < n; ++b) {
          if (S & (OutcomeId{1} << b)) continue;
          const OutcomeId T = (S & ~(OutcomeId{1} << a)) | (OutcomeId{1} << b);
          if (visited.insert(T).second) frontier.emplace(price_of(T, prices), subset_rank(n, T), T);
        }
      }
    }
  }
  for (OutcomeId S : fam.planted) offer(S);
  return best.set;
}

OutcomeId demand_by_enumeration(const PlantedFamily& fam, int i, const std::vector<Rational>& prices) {
  if (fam.n > 24) throw SizeError("enumeration demand oracle limited to n <= 24");
  Best best;
  for (OutcomeId S = 0; S <= full_mask(fam.n); ++S) {
    best.offer(value_oracle(fam, i, S) - price_of(S, prices), subset_rank(fam.n, S), S);
  }
  return best.set;
}

SubmodularityReport submodularity_test(const PlantedFamily& fam, int i, CheckMode mode, std::size_t trials,
                                       std::uint64_t seed) {
  const int n = fam.n;
  const OutcomeId full = full_mask(n);
  SubmodularityReport rep;
  auto f = [&](OutcomeId S) { return value_oracle(fam, i, S); };
  auto check_triple = [&](OutcomeId X, OutcomeId Y, int x) {
    const OutcomeId bit = OutcomeId{1} << x;
    ++rep.checked;
    if (f(X | bit) - f(X) < f(Y | bit) - f(Y)) rep.diminishing_violations.emplace_back(X, Y, x + 1);
  };
  auto check_monotone = [&](OutcomeId S, int x) {
    if (f(S | (OutcomeId{1} << x)) < f(S)) rep.monotone_violations.emplace_back(S, x + 1);
  };
  if (mode == CheckMode::kExhaustive) {
    if (n > 10) throw SizeError("exhaustive submodularity check limited to n <= 10");
    for (OutcomeId Y = 0; Y <= full; ++Y) {
      for (int x = 0; x < n; ++x) {
        if (Y & (OutcomeId{1} << x)) continue;
        check_monotone(Y, x);
        for (OutcomeId X = Y;; X = (X - 1) & Y) {
          check_triple(X, Y, x);
          if (X == 0) break;
        }
      }
    }
    return rep;
  }
  CounterRng rng = CounterRng(seed).split(0x8u);
  for (std::size_t t = 0; t < trials && n > 0; ++t) {
    const OutcomeId Y = rng() & full;
    if (Y == full) continue;
    const OutcomeId X = rng() & Y;
    int x;
    do {
      x = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    } while (Y & (OutcomeId{1} << x));
    check_triple(X, Y, x);
    check_monotone(X, x);
  }
  return rep;
}

std::pair<OutcomeId, Rational> planted_optimum(const PlantedFamily& fam, int i) {
  if (i < 1 || i >= fam.k()) throw ValidationError("planted optimum needs 1 <= i <= k-1");
  return {fam.planted[static_cast<std::size_t>(i)], Rational(1, 2)};
}

Valuation planted_valuation(const PlantedFamily& fam, int i) {
  Rational bound(static_cast<long>(fam.n) * fam.n);
  if (fam.corrupt_bonus) bound += abs_q(*fam.corrupt_bonus);
  return Valuation::oracle([fam, i](OutcomeId S) { return value_oracle(fam, i, S); }, bound,
                           "planted:n=" + std::to_string(fam.n) + ":i=" + std::to_string(i));
}

std::vector<ValuationSum> planted_functions(const PlantedFamily& fam) {
  std::vector<ValuationSum> fs;
  for (int i = 1; i <= fam.k(); ++i) {
    ValuationSum f;
    f.add(1, planted_valuation(fam, i));
    fs.push_back(std::move(f));
  }
  return fs;
}

std::vector<Rational> hardness_multipliers(int n, int k) {
  std::vector<Rational> Q;
  const Integer base(2 * k * n);
  Integer q(1);
  for (int i = 1; i <= k; ++i) {
    Q.emplace_back(q);
    q *= base * base;
  }
  return Q;
}

ReducedMdmdp hard_mdmdp(const PlantedFamily& fam) {
  const auto fs = planted_functions(fam);
  const auto space = OutcomeSpace::subset_lattice(fam.n);
  CompatCertificate cert = certify_compatibility(fs, space, hardness_multipliers(fam.n, fam.k()));
  if (!cert.report.ok) throw CertificationError("planted family failed its compatibility check");
  return sadp_to_mdmdp(fs, space, cert);
}

}  // namespace mechkit
