#include "mechkit/fmmf.hpp"

#include <bit>

namespace mechkit {

MatrixQ MarginalVector::reconstruct() const {
  MatrixQ r = MatrixQ::Zero(x.rows(), x.cols());
  const auto cols = static_cast<int>(x.cols());
  for (const auto& [s, c] : decomposition) {
    OutcomeId b = s;
    while (b) {
      const int k = std::countr_zero(b);
      r(k / cols, k % cols) += c;
      b &= b - 1;
    }
  }
  return r;
}

Rational fmmf_value(const std::vector<MatrixQ>& gs, const MatrixQ& x) {
  std::optional<Rational> best;
  for (const auto& g : gs) {
    if (g.rows() != x.rows() || g.cols() != x.cols()) throw DimensionError("fmmf_value: shape mismatch");
    Rational v = g.cwiseProduct(x).sum();
    if (!best || v < *best) best = v;
  }
  return best.value_or(Rational(0));
}

FmmfLp build_fmmf_lp(const std::vector<MatrixQ>& gs, const MatrixQ& f, const MatrixQ& fprime, const Rational& c0) {
  if (f.rows() != fprime.rows() || f.cols() != fprime.cols()) throw DimensionError("f and f' differ in shape");
  FmmfLp out;
  out.rows = static_cast<int>(f.rows());
  out.cols = static_cast<int>(f.cols());
  const Eigen::Index d = f.size();
  const Eigen::Index o = d;
  OracleLp& lp = out.lp;
  lp.objective = VectorQ::Zero(d + 1);
  lp.lower = VectorQ::Zero(d + 1);
  lp.upper = VectorQ::Ones(d + 1);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) lp.objective(i * f.cols() + j) = f(i, j) - fprime(i, j);
  }
  lp.objective(o) = c0;
  Rational hi(0), lo(0);
  for (const auto& g : gs) {
    if (g.rows() != f.rows() || g.cols() != f.cols()) throw DimensionError("objective matrix differs in shape");
    Rational pos(0), neg(0);
    VectorQ normal = VectorQ::Zero(d + 1);
    normal(o) = 1;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        const Rational& v = g(i, j);
        normal(i * g.cols() + j) = -v;
        if (v > 0) pos += v;
        if (v < 0) neg -= v;
      }
    }
    hi = std::max(hi, pos);
    lo = std::max(lo, neg);
    lp.rows.push_back(Halfspace{normal, Rational(0)});
  }
  if (gs.empty()) hi = 0;
  lp.lower(o) = -lo;
  lp.upper(o) = hi;
  return out;
}

std::vector<MatrixQ> additive_matrices(const std::vector<ValuationSum>& fs, int rows, int cols) {
  std::vector<MatrixQ> out;
  for (const auto& f : fs) {
    auto a = f.additive(rows, cols);
    if (!a) throw ValidationError("FMMF pipeline needs additive functions");
    out.push_back(*a);
  }
  return out;
}

namespace {

// Piece matrices H_k = sum_i a_{k,i} g_i of a concave objective built from
// bidder values only.
std::vector<MatrixQ> piece_matrices(const SadpInstance& inst, int rows, int cols) {
  std::vector<MatrixQ> hs;
  if (!inst.general() || inst.c0.value_or(Rational(0)) == 0) return hs;
  std::vector<ValuationSum> gsums;
  for (const auto& g : *inst.gs) {
    ValuationSum s;
    s.add(1, g);
    gsums.push_back(std::move(s));
  }
  const auto gm = additive_matrices(gsums, rows, cols);
  for (const auto& piece : inst.objective.pieces) {
    if (!piece.outcome.empty() || piece.constant != 0) {
      throw ValidationError("FMMF pipeline supports objectives over bidder values only");
    }
    for (const auto& p : piece.price) {
      if (p != 0) throw ValidationError("FMMF pipeline supports allocation-only objectives");
    }
    MatrixQ h = MatrixQ::Zero(rows, cols);
    for (std::size_t i = 0; i < gm.size(); ++i) {
      if (piece.bidder[i] != 0) h += piece.bidder[i] * gm[i];
    }
    hs.push_back(std::move(h));
  }
  return hs;
}

OutcomeId set_of(const VectorQ& point) {
  OutcomeId s = 0;
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    if (point(k) != 0) s |= OutcomeId{1} << k;
  }
  return s;
}

}  // namespace

FmmfResult solve_sadp_fmmf(const SadpInstance& inst, const MaxWeightOracle& G, const WsoOptions& opt) {
  const int rows = G.family.rows, cols = G.family.cols;
  std::vector<ValuationSum> two(inst.fs.begin(), inst.fs.begin() + std::min<std::size_t>(2, inst.fs.size()));
  two.resize(2);
  const auto fm = additive_matrices(two, rows, cols);
  const auto hs = piece_matrices(inst, rows, cols);
  FmmfLp flp = build_fmmf_lp(hs, fm[0], fm[1], hs.empty() ? Rational(0) : *inst.c0);

  WeirdSeparationOracle wso(marginal_direction_oracle(G), opt);
  const Eigen::Index d = static_cast<Eigen::Index>(rows) * cols;
  std::optional<std::pair<VectorQ, WsoVerdict>> last_yes;
  SeparationOracle sep = [&](const VectorQ& y) -> std::optional<Halfspace> {
    VectorQ x = y.head(d);
    WsoVerdict v = wso.query(x);
    if (v.yes) {
      last_yes.emplace(x, std::move(v));
      return std::nullopt;
    }
    VectorQ normal = VectorQ::Zero(d + 1);
    normal.head(d) = v.separating.normal;
    return Halfspace{normal, v.separating.offset};
  };
  auto res = maximize_cutting_plane(flp.lp, sep);
  VectorQ xstar = res.x.head(d);
  if (!last_yes || last_yes->first != xstar) {
    WsoVerdict v = wso.query(xstar);
    if (!v.yes) throw PrecisionError("optimal marginals rejected by the separation oracle", wso.transcript().str());
    last_yes.emplace(xstar, std::move(v));
  }
  const WsoVerdict& yes = last_yes->second;

  Distribution mixture;
  Rational total(0);
  for (std::size_t j = 0; j < yes.points.size(); ++j) {
    if (yes.coefficients[j] == 0) continue;
    OutcomeId s = set_of(yes.points[j]);
    if (!G.family.contains(s)) throw ContractError("max-weight oracle returned a set outside the family", wso.transcript().str());
    mixture.emplace_back(s, yes.coefficients[j]);
    total += yes.coefficients[j];
  }
  if (total < 1) mixture.emplace_back(0, 1 - total);
  mixture = canonical(std::move(mixture));

  FmmfResult out;
  out.solution.allocation = mixture;
  out.solution.achieved_index = 1;
  if (inst.general()) out.solution.prices = std::vector<Rational>(inst.gs->size(), Rational(0));
  out.marginals.x = MatrixQ(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out.marginals.x(i, j) = xstar(i * cols + j);
  }
  out.marginals.decomposition = mixture;
  out.lp_value = res.value;
  out.iterations = res.iterations;
  out.oracle_calls = wso.oracle_calls();
  return out;
}

SadpOracle fmmf_sadp_oracle(const MaxWeightOracle& G, const WsoOptions& opt) {
  SadpOracle o;
  o.alpha = G.alpha;
  o.name = "fmmf:" + G.family.name();
  o.solver = [G, opt](const SadpInstance& inst, CounterRng&) { return solve_sadp_fmmf(inst, G, opt).solution; };
  return o;
}

}  // namespace mechkit
