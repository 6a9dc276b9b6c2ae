#include "mechkit/brute_force.hpp"

#include "mechkit/lp.hpp"

namespace mechkit {

BruteForceResult brute_force_mechanism(const TypeSpace& ts, const OutcomeSpace& os, const ObjectiveSpec& obj,
                                       const Rational& alpha, std::size_t limit) {
  const auto profiles = ts.profiles();
  const auto outcomes = os.enumerate();
  if (profiles.size() * outcomes.size() > limit) throw SizeError("dense mechanism LP exceeds the size limit");
  const int m = ts.bidders();
  const auto np = static_cast<Eigen::Index>(profiles.size());
  const auto nx = static_cast<Eigen::Index>(outcomes.size());

  Rational vmax(1);
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < ts.types(i); ++t) vmax = std::max(vmax, ts.type(i, t).max_value(os));
  }

  // Variable blocks: q(p, x), P(p, i), V(p).
  auto qv = [&](Eigen::Index p, Eigen::Index x) { return p * nx + x; };
  const Eigen::Index p0 = np * nx;
  auto pv = [&](Eigen::Index p, int i) { return p0 + p * m + i; };
  const Eigen::Index v0 = p0 + np * m;
  LinearProgram<Rational> lp(v0 + np);
  for (Eigen::Index p = 0; p < np; ++p) {
    for (int i = 0; i < m; ++i) lp.upper[static_cast<std::size_t>(pv(p, i))] = vmax;
    lp.lower[static_cast<std::size_t>(v0 + p)] = std::nullopt;
  }

  std::vector<Rational> prob;
  for (Eigen::Index p = 0; p < np; ++p) {
    prob.push_back(ts.profile_probability(profiles[static_cast<std::size_t>(p)]));
  }
  // values[i][t][x] = t(x) for bidder i.
  std::vector<std::vector<std::vector<Rational>>> values(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < ts.types(i); ++t) {
      std::vector<Rational> row;
      for (OutcomeId x : outcomes) row.push_back(ts.type(i, t)(x));
      values[static_cast<std::size_t>(i)].push_back(std::move(row));
    }
  }

  for (Eigen::Index p = 0; p < np; ++p) {
    VectorQ row = lp.zero_row();
    for (Eigen::Index x = 0; x < nx; ++x) row(qv(p, x)) = 1;
    lp.add_row(row, Sense::kEqual, alpha);
    lp.objective(v0 + p) = prob[static_cast<std::size_t>(p)];
    const auto& prof = profiles[static_cast<std::size_t>(p)];
    for (const auto& piece : obj.pieces) {
      VectorQ r = lp.zero_row();
      r(v0 + p) = 1;
      for (Eigen::Index x = 0; x < nx; ++x) {
        Rational c(0);
        for (int i = 0; i < m; ++i) {
          const Rational& a = piece.bidder[static_cast<std::size_t>(i)];
          if (a != 0) c += a * values[static_cast<std::size_t>(i)][static_cast<std::size_t>(prof[static_cast<std::size_t>(i)])][static_cast<std::size_t>(x)];
        }
        if (auto it = piece.outcome.find(outcomes[static_cast<std::size_t>(x)]); it != piece.outcome.end()) c += it->second;
        r(qv(p, x)) = -c;
      }
      for (int i = 0; i < m; ++i) r(pv(p, i)) = -piece.price[static_cast<std::size_t>(i)];
      lp.add_row(r, Sense::kLessEqual, piece.constant);
    }
  }

  // Interim rows. For bidder i, type t and report tp, sum over the others'
  // profiles with weight Pr[p_-i] of t(X(tp, p_-i)) - P_i(tp, p_-i).
  auto interim_row = [&](int i, int t, int tp, const Rational& sign, VectorQ& row) {
    for (Eigen::Index p = 0; p < np; ++p) {
      const auto& prof = profiles[static_cast<std::size_t>(p)];
      if (prof[static_cast<std::size_t>(i)] != tp) continue;
      const Rational w = prob[static_cast<std::size_t>(p)] / ts.prior(i, tp);
      for (Eigen::Index x = 0; x < nx; ++x) {
        row(qv(p, x)) += sign * w * values[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)][static_cast<std::size_t>(x)];
      }
      row(pv(p, i)) -= sign * w;
    }
  };
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < ts.types(i); ++t) {
      for (int tp = 0; tp < ts.types(i); ++tp) {
        if (tp == t) continue;
        VectorQ row = lp.zero_row();
        interim_row(i, t, tp, Rational(1), row);
        interim_row(i, t, t, Rational(-1), row);
        lp.add_row(row, Sense::kLessEqual, Rational(0));
      }
      VectorQ row = lp.zero_row();
      interim_row(i, t, t, Rational(-1), row);
      lp.add_row(row, Sense::kLessEqual, Rational(0));
    }
  }

  auto r = solve_lp(lp);
  if (r.status != LpStatus::kOptimal) throw InfeasibleError("dense mechanism LP has no optimum");
  BruteForceResult out;
  out.value = r.value;
  out.implicit = ImplicitForm(Layout(ts.type_counts(), obj.kind != ObjectiveKind::kRevenue));
  if (out.implicit.layout.has_objective()) out.implicit.objective() = r.value;
  for (Eigen::Index p = 0; p < np; ++p) {
    Distribution d;
    for (Eigen::Index x = 0; x < nx; ++x) {
      if (r.x(qv(p, x)) != 0) d.emplace_back(outcomes[static_cast<std::size_t>(x)], r.x(qv(p, x)));
    }
    out.allocations.push_back(canonical(std::move(d)));
  }
  for (int i = 0; i < m; ++i) {
    for (int tp = 0; tp < ts.types(i); ++tp) {
      for (Eigen::Index p = 0; p < np; ++p) {
        const auto& prof = profiles[static_cast<std::size_t>(p)];
        if (prof[static_cast<std::size_t>(i)] != tp) continue;
        const Rational w = prob[static_cast<std::size_t>(p)] / ts.prior(i, tp);
        for (int t = 0; t < ts.types(i); ++t) {
          for (Eigen::Index x = 0; x < nx; ++x) {
            out.implicit.pi(i, t, tp) += w * r.x(qv(p, x)) * values[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)][static_cast<std::size_t>(x)];
          }
        }
        out.implicit.price(i, tp) += w * r.x(pv(p, i));
      }
    }
  }
  return out;
}

}  // namespace mechkit
