#include "mechkit/revtheory.hpp"

#include <bit>

#include "mechkit/maxweight.hpp"

namespace mechkit {

namespace {

MatchingCheck check_matching(const std::vector<Valuation>& rows, const std::vector<Distribution>& cols) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  MatrixQ w(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) w(r, c) = rows[static_cast<std::size_t>(r)].expect(cols[static_cast<std::size_t>(c)]);
  }
  MatchingCheck out;
  if (k == 0) return out;
  // Shift so every maximum matching is perfect: k (min + c) > (k - 1)(max + c).
  const Rational lo = w.minCoeff(), hi = w.maxCoeff();
  const Rational shift = Rational(k - 1) * hi - Rational(k) * lo + 1;
  MatrixQ shifted = w.array() + shift;
  const OutcomeId s = max_weight_matching(shifted);
  out.optimum = set_weight(w, s, static_cast<int>(k));
  out.assignment.assign(static_cast<std::size_t>(k), -1);
  for (OutcomeId b = s; b; b &= b - 1) {
    const int cell = std::countr_zero(b);
    out.assignment[static_cast<std::size_t>(cell / k)] = static_cast<int>(cell % k);
  }
  for (Eigen::Index r = 0; r < k; ++r) out.claimed += w(r, r);
  out.ok = out.claimed >= out.optimum;
  return out;
}

void check_lengths(const std::vector<Valuation>& types, const std::vector<Distribution>& allocations) {
  if (types.size() != allocations.size()) throw DimensionError("types and allocations differ in length");
}

}  // namespace

MatchingCheck cyclic_monotone_check(const std::vector<Valuation>& types, const std::vector<Distribution>& allocations) {
  check_lengths(types, allocations);
  return check_matching(types, allocations);
}

CompatibilityReport compatible_check(const std::vector<Valuation>& types, const std::vector<Distribution>& allocations) {
  check_lengths(types, allocations);
  CompatibilityReport rep;
  rep.cyclic = check_matching(types, allocations);
  rep.ok = rep.cyclic.ok;
  const int k = static_cast<int>(types.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j <= k; ++j) {
      // Types t_{i+1..j} (0-based i..j-1) against X_{i..j-1} (X_0 null).
      std::vector<Valuation> rows(types.begin() + i, types.begin() + j);
      std::vector<Distribution> cols;
      for (int l = i; l < j; ++l) cols.push_back(l == 0 ? point_mass(0) : allocations[static_cast<std::size_t>(l - 1)]);
      WindowCheck wc{i, j, check_matching(rows, cols)};
      rep.ok = rep.ok && wc.check.ok;
      rep.windows.push_back(std::move(wc));
    }
  }
  return rep;
}

std::vector<Rational> payment_chain(const std::vector<Valuation>& types, const std::vector<Distribution>& allocations) {
  check_lengths(types, allocations);
  std::vector<Rational> p;
  for (std::size_t j = 0; j < types.size(); ++j) {
    const Rational prev_alloc = j == 0 ? Rational(0) : types[j].expect(allocations[j - 1]);
    const Rational prev_price = j == 0 ? Rational(0) : p.back();
    p.push_back(types[j].expect(allocations[j]) - prev_alloc + prev_price);
  }
  return p;
}

Rational menu_revenue(const OrderedMenu& menu, const std::vector<Rational>& prices) {
  Rational r(0);
  for (std::size_t j = 0; j < prices.size(); ++j) r += menu.probabilities[j] * prices[j];
  return r;
}

Rational rev_upper_bound(const OrderedMenu& menu) {
  check_lengths(menu.types, menu.allocations);
  const std::size_t k = menu.types.size();
  Rational tail(0), total(0);
  std::vector<Rational> tails(k);
  for (std::size_t j = k; j-- > 0;) tails[j] = tail += menu.probabilities[j];
  for (std::size_t l = 0; l < k; ++l) {
    Rational inc = menu.types[l].expect(menu.allocations[l]);
    if (l > 0) inc -= menu.types[l].expect(menu.allocations[l - 1]);
    total += tails[l] * inc;
  }
  return total;
}

BalanceReport d_balance(const std::vector<ValuationSum>& fs, const OutcomeSpace& space) {
  const int k = static_cast<int>(fs.size());
  if (k < 1) throw ValidationError("d_balance needs at least one function");
  BalanceReport rep;
  for (int l = 0; l < k; ++l) {
    SadpInstance inst;
    inst.space = space;
    inst.fs = {fs[static_cast<std::size_t>(l)], l + 1 < k ? fs[static_cast<std::size_t>(l + 1)] : ValuationSum{}};
    SadpSolution s = brute_force_sadp(inst);
    rep.maximizers.push_back(s.allocation);
    if (l + 1 < k) rep.differences.push_back(difference(inst, 1, s.allocation));
  }
  rep.top = fs.back().expect(rep.maximizers.back());
  Rational D(0);
  for (const auto& d : rep.differences) {
    if (d == 0) {
      if (rep.top > 0) {
        rep.D = std::nullopt;
        return rep;
      }
      continue;
    }
    D = std::max(D, Rational(rep.top / d));
  }
  rep.D = D;
  return rep;
}

std::vector<Valuation> scaled_types(const std::vector<ValuationSum>& fs, const std::vector<Rational>& Q,
                                    const OutcomeSpace& space) {
  if (fs.size() != Q.size()) throw DimensionError("one multiplier per function is required");
  std::vector<Valuation> out;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    ValuationSum f = fs[j];
    const Rational q = Q[j];
    Rational bound(0);
    for (const auto& [c, v] : f.terms) bound += c * v.max_value(space);
    out.push_back(Valuation::oracle([f, q](OutcomeId x) { return q * f(x); }, q * bound,
                                    "Q" + std::to_string(j + 1) + "f" + std::to_string(j + 1)));
  }
  return out;
}

CompatCertificate certify_compatibility(const std::vector<ValuationSum>& fs, const OutcomeSpace& space,
                                        const std::vector<Rational>& Q) {
  CompatCertificate c;
  c.Q = Q;
  c.allocations = d_balance(fs, space).maximizers;
  c.report = compatible_check(scaled_types(fs, Q, space), c.allocations);
  for (const auto& q : Q) c.bits = std::max(c.bits, bit_size(q));
  return c;
}

std::vector<Rational> reduction_prior(const std::vector<Rational>& Q) {
  std::vector<Rational> q;
  for (std::size_t j = 0; j < Q.size(); ++j) {
    q.push_back(j + 1 < Q.size() ? Rational(1 / Q[j] - 1 / Q[j + 1]) : Rational(1 / Q[j]));
  }
  return q;
}

ReducedMdmdp sadp_to_mdmdp(const std::vector<ValuationSum>& fs, const OutcomeSpace& space,
                           const CompatCertificate& certificate) {
  const auto& Q = certificate.Q;
  if (Q.size() != fs.size() || Q.empty()) throw CertificationError("certificate has the wrong number of multipliers");
  if (Q[0] != 1) throw CertificationError("the first multiplier must be 1");
  for (std::size_t j = 1; j < Q.size(); ++j) {
    if (!(Q[j - 1] < Q[j])) throw CertificationError("multipliers must be strictly increasing");
  }
  if (!certificate.report.ok) throw CertificationError("certificate records a failed compatibility window");
  // Re-derive the transcript rather than trusting the stored one.
  const CompatCertificate fresh = certify_compatibility(fs, space, Q);
  if (!fresh.report.ok || fresh.allocations != certificate.allocations) {
    throw CertificationError("certificate does not verify against the functions");
  }
  ReducedMdmdp out{TypeSpace({BidderTypes{scaled_types(fs, Q, space), reduction_prior(Q)}}), space, fresh};
  return out;
}

Rational approximation_bound(const Rational& alpha, const Rational& D, int k) {
  if (k < 2) throw ValidationError("approximation bound needs k >= 2");
  return alpha - (1 - alpha) * D / (k - 1);
}

Extraction extract_sadp_solution(const std::vector<Distribution>& allocations, const std::vector<ValuationSum>& fs,
                                 const Rational& alpha_mech, const Rational& D, int k) {
  if (static_cast<int>(fs.size()) != k || static_cast<int>(allocations.size()) != k) {
    throw DimensionError("extraction needs k functions and k allocations");
  }
  Extraction ex;
  ex.ratio_bound = approximation_bound(alpha_mech, D, k);
  std::optional<Rational> best;
  for (int l = 0; l + 1 < k; ++l) {
    const auto& X = allocations[static_cast<std::size_t>(l)];
    Rational d = fs[static_cast<std::size_t>(l)].expect(X) - fs[static_cast<std::size_t>(l + 1)].expect(X);
    ex.differences.push_back(d);
    if (!best || d > *best) {
      best = d;
      ex.solution.allocation = X;
      ex.solution.achieved_index = l + 1;
    }
  }
  return ex;
}

}  // namespace mechkit
