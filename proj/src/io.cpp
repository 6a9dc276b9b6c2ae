#include "mechkit/io.hpp"

#include <fstream>
#include <sstream>

namespace mechkit {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

const Json& array_field(const Json& j, const char* key, const std::string& where) {
  const Json& a = field(j, key, where);
  if (!a.is_array()) fail(where + "." + key, "expected an array");
  return a;
}

int int_from(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

std::uint64_t u64_from(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  if (j.is_string()) {
    try {
      std::size_t used = 0;
      const auto s = j.get<std::string>();
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  fail(where, "expected a non-negative integer");
}

std::string idx(const std::string& where, std::size_t k) { return where + "[" + std::to_string(k) + "]"; }

OutcomeId outcome_key(const OutcomeSpace& space, const std::string& key, const std::string& where) {
  if (space.kind() == OutcomeSpace::Kind::kExplicit) {
    try {
      return space.id_of(key);
    } catch (const ValidationError& e) {
      fail(where, e.what());
    }
  }
  OutcomeId x = 0;
  try {
    std::size_t used = 0;
    x = std::stoull(key, &used);
    if (used != key.size()) fail(where, "outcome key \"" + key + "\" is not a bitmask");
  } catch (const std::logic_error&) {
    fail(where, "outcome key \"" + key + "\" is not a bitmask");
  }
  if (!space.contains(x)) fail(where, "outcome " + key + " is not in the outcome space");
  return x;
}

MatrixQ matrix_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty matrix");
  // A flat vector is a single row.
  const bool flat = !j[0].is_array();
  const auto rows = flat ? Eigen::Index{1} : static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(flat ? j.size() : j[0].size());
  MatrixQ m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = flat ? j : j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) fail(idx(where, static_cast<std::size_t>(r)), "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = rational_from(row[static_cast<std::size_t>(c)], idx(idx(where, static_cast<std::size_t>(r)), static_cast<std::size_t>(c)));
    }
  }
  return m;
}

Json matrix_json(const MatrixQ& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(rational_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Json vector_json(const std::vector<Rational>& v) {
  Json out = Json::array();
  for (const auto& q : v) out.push_back(rational_json(q));
  return out;
}

Json vector_json(const VectorQ& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(rational_json(v(k)));
  return out;
}

std::vector<Rational> rationals_from(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<Rational> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(rational_from(j[k], idx(where, k)));
  return out;
}

VectorQ vectorq_from(const Json& j, const std::string& where) {
  const auto v = rationals_from(j, where);
  VectorQ out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[k];
  return out;
}

Valuation valuation_from(const Json& j, const OutcomeSpace& space, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a valuation object");
  if (j.contains("additive")) return Valuation::additive(matrix_from(j["additive"], where + ".additive"));
  const Json& values = field(j, "values", where);
  if (!values.is_object()) fail(where + ".values", "expected an object keyed by outcome");
  std::map<OutcomeId, Rational> table;
  for (auto it = values.begin(); it != values.end(); ++it) {
    const std::string w = where + ".values." + it.key();
    table[outcome_key(space, it.key(), w)] = rational_from(it.value(), w);
  }
  return Valuation::table(std::move(table));
}

Json valuation_json(const Valuation& v, const OutcomeSpace& space) {
  Json out;
  switch (v.kind()) {
    case Valuation::Kind::kAdditive:
      out["additive"] = matrix_json(v.additive_values());
      return out;
    case Valuation::Kind::kTable: {
      Json values = Json::object();
      for (const auto& [x, q] : v.table_values()) values[space.label_of(x)] = rational_json(q);
      out["values"] = std::move(values);
      return out;
    }
    case Valuation::Kind::kOracle: {
      // Oracle valuations are written out as their full table.
      Json values = Json::object();
      for (OutcomeId x : space.enumerate()) {
        const Rational q = v(x);
        if (q != 0) values[space.label_of(x)] = rational_json(q);
      }
      out["values"] = std::move(values);
      return out;
    }
  }
  return out;
}

Json outcomes_json(const OutcomeSpace& space, const std::optional<SetFamily>& family) {
  Json out;
  switch (space.kind()) {
    case OutcomeSpace::Kind::kExplicit:
      out["kind"] = "explicit";
      out["ids"] = space.labels();
      break;
    case OutcomeSpace::Kind::kSubsetLattice:
      out["kind"] = "lattice";
      out["n"] = space.items();
      break;
    case OutcomeSpace::Kind::kBipartiteGrid:
      if (!family) throw ValidationError("grid outcome spaces need their set family to be serialised");
      out["kind"] = "grid";
      out["m"] = space.rows();
      out["n"] = space.items();
      out["family"] = family_to_json(*family);
      break;
  }
  return out;
}

OutcomeSpace outcomes_from(const Json& j, std::optional<SetFamily>& family, const std::string& where) {
  const std::string kind = field(j, "kind", where).is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "explicit") {
    std::vector<std::string> labels;
    const Json& ids = array_field(j, "ids", where);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k].is_string()) labels.push_back(ids[k].get<std::string>());
      else if (ids[k].is_number_integer()) labels.push_back(std::to_string(ids[k].get<long long>()));
      else fail(idx(where + ".ids", k), "expected a string or integer label");
    }
    return OutcomeSpace::explicit_outcomes(std::move(labels));
  }
  if (kind == "lattice") return OutcomeSpace::subset_lattice(int_from(field(j, "n", where), where + ".n"));
  if (kind == "grid") {
    const int m = int_from(field(j, "m", where), where + ".m");
    const int n = int_from(field(j, "n", where), where + ".n");
    family = family_from_json(field(j, "family", where), m, n, where + ".family");
    return family->space();
  }
  fail(where + ".kind", "expected \"explicit\", \"lattice\" or \"grid\"");
}

LinearPiece piece_from(const Json& j, int bidders, const OutcomeSpace& space, const std::string& where) {
  LinearPiece p;
  p.bidder = j.contains("bidder") ? rationals_from(j["bidder"], where + ".bidder") : std::vector<Rational>(static_cast<std::size_t>(bidders), Rational(0));
  p.price = j.contains("price") ? rationals_from(j["price"], where + ".price") : std::vector<Rational>(static_cast<std::size_t>(bidders), Rational(0));
  if (static_cast<int>(p.bidder.size()) != bidders || static_cast<int>(p.price.size()) != bidders) {
    fail(where, "bidder and price coefficients need one entry per bidder");
  }
  if (j.contains("outcome")) {
    const Json& o = j["outcome"];
    if (!o.is_object()) fail(where + ".outcome", "expected an object keyed by outcome");
    for (auto it = o.begin(); it != o.end(); ++it) {
      const std::string w = where + ".outcome." + it.key();
      p.outcome[outcome_key(space, it.key(), w)] = rational_from(it.value(), w);
    }
  }
  if (j.contains("constant")) p.constant = rational_from(j["constant"], where + ".constant");
  return p;
}

Json piece_json(const LinearPiece& p, const OutcomeSpace& space) {
  Json out;
  out["bidder"] = vector_json(p.bidder);
  out["price"] = vector_json(p.price);
  Json o = Json::object();
  for (const auto& [x, q] : p.outcome) o[space.label_of(x)] = rational_json(q);
  out["outcome"] = std::move(o);
  out["constant"] = rational_json(p.constant);
  return out;
}

Json objective_json_in(const ObjectiveSpec& obj, const OutcomeSpace& space) {
  Json out;
  const bool named = obj.name == "revenue" || obj.name == "welfare" || obj.name == "fmmf";
  out["kind"] = named ? obj.name : std::string("general");
  out["name"] = obj.name;
  Json pieces = Json::array();
  for (const auto& p : obj.pieces) pieces.push_back(piece_json(p, space));
  out["pieces"] = std::move(pieces);
  return out;
}

Instance fmmf_shorthand(const Json& j) {
  Instance inst;
  const int m = int_from(field(j, "m", "instance"), "instance.m");
  const int n = int_from(field(j, "n", "instance"), "instance.n");
  const Json fam = j.contains("family") ? j["family"] : Json("matching");
  inst.family = family_from_json(fam, m, n, "instance.family");
  inst.outcomes = inst.family->space();
  const Json& values = array_field(j, "values", "instance");
  if (static_cast<int>(values.size()) != m) fail("instance.values", "expected one entry per bidder (m rows)");
  std::vector<BidderTypes> bidders;
  for (int i = 0; i < m; ++i) {
    const std::string w = idx("instance.values", static_cast<std::size_t>(i));
    const Json& vi = values[static_cast<std::size_t>(i)];
    if (!vi.is_array() || vi.empty()) fail(w, "expected item values or a list of types");
    // A bidder row is either one type (item values) or a list of types.
    std::vector<Json> types = vi[0].is_array() ? std::vector<Json>(vi.begin(), vi.end()) : std::vector<Json>{vi};
    BidderTypes b;
    for (std::size_t t = 0; t < types.size(); ++t) {
      const auto row = rationals_from(types[t], idx(w, t));
      if (static_cast<int>(row.size()) != n) fail(idx(w, t), "expected n item values");
      MatrixQ a = MatrixQ::Zero(m, n);
      for (int c = 0; c < n; ++c) a(i, c) = row[static_cast<std::size_t>(c)];
      b.types.push_back(Valuation::additive(a));
    }
    if (j.contains("prior")) {
      b.prior = rationals_from(field(j, "prior", "instance")[static_cast<std::size_t>(i)], idx("instance.prior", static_cast<std::size_t>(i)));
    } else {
      b.prior.assign(types.size(), Rational(1, static_cast<long>(types.size())));
    }
    bidders.push_back(std::move(b));
  }
  inst.types = TypeSpace(std::move(bidders));
  inst.objective = ObjectiveSpec::fmmf(m);
  return inst;
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" +
                          e.what() + ")");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

Json rational_json(const Rational& q) { return format_rational(q); }

Rational rational_from(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (!j.is_string()) fail(where, "expected a rational \"num/den\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
}

SetFamily family_from_json(const Json& j, int m, int n, const std::string& where) {
  const Json spec = j.is_string() ? Json{{"kind", j}} : j;
  const Json& kind_j = field(spec, "kind", where);
  const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : "";
  if (kind == "matching") return SetFamily::matching(m, n);
  if (kind == "uniform_matroid") {
    if (m != 1) fail(where, "matroid families live on a single row (m = 1)");
    return SetFamily::uniform_matroid(n, int_from(field(spec, "rank", where), where + ".rank"));
  }
  if (kind == "partition_matroid") {
    if (m != 1) fail(where, "matroid families live on a single row (m = 1)");
    std::vector<int> block, caps;
    for (const auto& b : array_field(spec, "block", where)) block.push_back(int_from(b, where + ".block"));
    for (const auto& c : array_field(spec, "capacities", where)) caps.push_back(int_from(c, where + ".capacities"));
    if (static_cast<int>(block.size()) != n) fail(where + ".block", "expected one block index per element");
    return SetFamily::partition_matroid(std::move(block), std::move(caps));
  }
  if (kind == "explicit") {
    std::vector<OutcomeId> sets;
    for (const auto& s : array_field(spec, "sets", where)) sets.push_back(u64_from(s, where + ".sets"));
    return SetFamily::explicit_family(m, n, std::move(sets));
  }
  fail(where + ".kind", "unknown family \"" + kind + "\"");
}

Json family_to_json(const SetFamily& f) {
  Json out;
  out["kind"] = f.name();
  switch (f.kind) {
    case SetFamily::Kind::kBipartiteMatching:
      break;
    case SetFamily::Kind::kUniformMatroid:
      out["rank"] = f.rank;
      break;
    case SetFamily::Kind::kPartitionMatroid:
      out["block"] = f.block;
      out["capacities"] = f.capacities;
      break;
    case SetFamily::Kind::kExplicit:
      out["sets"] = f.sets;
      break;
  }
  return out;
}

Instance instance_from_json(const Json& j) {
  if (!j.is_object()) fail("instance", "expected an object");
  if (j.contains("m") && j.contains("values")) return fmmf_shorthand(j);
  Instance inst;
  inst.outcomes = outcomes_from(field(j, "outcomes", "instance"), inst.family, "instance.outcomes");
  const Json& bidders = array_field(j, "bidders", "instance");
  std::vector<BidderTypes> bs;
  for (std::size_t i = 0; i < bidders.size(); ++i) {
    const std::string w = idx("instance.bidders", i);
    BidderTypes b;
    const Json& types = array_field(bidders[i], "types", w);
    for (std::size_t t = 0; t < types.size(); ++t) b.types.push_back(valuation_from(types[t], inst.outcomes, idx(w + ".types", t)));
    b.prior = rationals_from(field(bidders[i], "prior", w), w + ".prior");
    if (b.prior.size() != b.types.size()) fail(w + ".prior", "expected one probability per type");
    bs.push_back(std::move(b));
  }
  inst.types = TypeSpace(std::move(bs));
  inst.objective = j.contains("objective") ? objective_from_json(j["objective"], inst.types.bidders(), inst.outcomes)
                                           : ObjectiveSpec::revenue(inst.types.bidders());
  return inst;
}

Json instance_to_json(const Instance& inst) {
  Json out;
  out["outcomes"] = outcomes_json(inst.outcomes, inst.family);
  Json bidders = Json::array();
  for (int i = 0; i < inst.types.bidders(); ++i) {
    Json b;
    Json types = Json::array();
    for (const auto& v : inst.types.bidder(i).types) types.push_back(valuation_json(v, inst.outcomes));
    b["types"] = std::move(types);
    b["prior"] = vector_json(inst.types.bidder(i).prior);
    bidders.push_back(std::move(b));
  }
  out["bidders"] = std::move(bidders);
  out["objective"] = objective_json_in(inst.objective, inst.outcomes);
  return out;
}

Json objective_to_json(const ObjectiveSpec& obj) {
  // Outcome terms use raw ids here; instance files use labels.
  return objective_json_in(obj, OutcomeSpace::subset_lattice(62));
}

ObjectiveSpec objective_from_json(const Json& j, int bidders, const OutcomeSpace& space) {
  const std::string where = "objective";
  const Json& kind_j = field(j, "kind", where);
  const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : "";
  if (kind == "revenue") return ObjectiveSpec::revenue(bidders);
  if (kind == "welfare") return ObjectiveSpec::welfare(bidders);
  if (kind == "fmmf") return ObjectiveSpec::fmmf(bidders);
  if (kind != "general") fail(where + ".kind", "expected revenue, welfare, fmmf or general");
  std::vector<LinearPiece> pieces;
  const Json& ps = array_field(j, "pieces", where);
  for (std::size_t k = 0; k < ps.size(); ++k) pieces.push_back(piece_from(ps[k], bidders, space, idx(where + ".pieces", k)));
  const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "general";
  return ObjectiveSpec::general(std::move(pieces), name);
}

Json distribution_json(const Distribution& d, const OutcomeSpace& space) {
  Json out = Json::array();
  for (const auto& [x, p] : d) out.push_back(Json::array({space.label_of(x), rational_json(p)}));
  return out;
}

Distribution distribution_from(const Json& j, const OutcomeSpace& space, const std::string& where) {
  if (!j.is_array()) fail(where, "expected [[outcome, probability], ...]");
  Distribution d;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string w = idx(where, k);
    if (!j[k].is_array() || j[k].size() != 2) fail(w, "expected [outcome, probability]");
    const Json& key = j[k][0];
    const std::string label = key.is_string() ? key.get<std::string>() : key.dump();
    d.emplace_back(outcome_key(space, label, w), rational_from(j[k][1], w));
  }
  return canonical(std::move(d));
}

Json implicit_to_json(const ImplicitForm& f) {
  Json out;
  out["type_counts"] = f.layout.type_counts();
  out["with_objective"] = f.layout.has_objective();
  out["values"] = vector_json(f.values);
  return out;
}

ImplicitForm implicit_from_json(const Json& j) {
  const std::string where = "implicit";
  std::vector<int> counts;
  for (const auto& c : array_field(j, "type_counts", where)) counts.push_back(int_from(c, where + ".type_counts"));
  const Json& wo = field(j, "with_objective", where);
  if (!wo.is_boolean()) fail(where + ".with_objective", "expected a boolean");
  ImplicitForm f(Layout(counts, wo.get<bool>()));
  const VectorQ v = vectorq_from(field(j, "values", where), where + ".values");
  if (v.size() != f.layout.dim()) fail(where + ".values", "length does not match the layout");
  f.values = v;
  return f;
}

Json blueprint_to_json(const MechanismBlueprint& b) {
  Json out;
  out["type_counts"] = b.layout.type_counts();
  out["with_objective"] = b.layout.has_objective();
  out["objective"] = objective_to_json(b.objective);
  Json blocks = Json::array();
  for (const auto& bb : b.blocks) {
    Json blk;
    blk["name"] = bb.block.name;
    blk["coords"] = bb.block.coords;
    Json dirs = Json::array();
    for (const auto& d : bb.directions) dirs.push_back(vector_json(d.values));
    blk["directions"] = std::move(dirs);
    blk["coefficients"] = vector_json(bb.coefficients);
    blocks.push_back(std::move(blk));
  }
  out["blocks"] = std::move(blocks);
  Json prices = Json::array();
  for (const auto& row : b.interim_prices) prices.push_back(vector_json(row));
  out["interim_prices"] = std::move(prices);
  out["prior"] = {{"profiles", b.prior.profiles}, {"weights", vector_json(b.prior.weights)},
                  {"sample_size", b.prior.sample_size}};
  out["oracle"] = b.oracle_name;
  out["alpha"] = rational_json(b.alpha);
  out["seed"] = std::to_string(b.seed);
  out["trials"] = b.trials;
  out["scale"] = rational_json(b.scale);
  return out;
}

MechanismBlueprint blueprint_from_json(const Json& j, const Instance& inst) {
  const std::string where = "blueprint";
  MechanismBlueprint b;
  std::vector<int> counts;
  for (const auto& c : array_field(j, "type_counts", where)) counts.push_back(int_from(c, where + ".type_counts"));
  if (counts != inst.types.type_counts()) fail(where + ".type_counts", "does not match the instance");
  const Json& wo = field(j, "with_objective", where);
  if (!wo.is_boolean()) fail(where + ".with_objective", "expected a boolean");
  b.layout = Layout(counts, wo.get<bool>());
  b.objective = objective_from_json(field(j, "objective", where), inst.types.bidders(), OutcomeSpace::subset_lattice(62));
  const Json& blocks = array_field(j, "blocks", where);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const std::string w = idx(where + ".blocks", k);
    BlueprintBlock bb;
    bb.block.name = field(blocks[k], "name", w).get<std::string>();
    for (const auto& c : array_field(blocks[k], "coords", w)) {
      const int coord = int_from(c, w + ".coords");
      if (coord < 0 || coord >= b.layout.dim()) fail(w + ".coords", "coordinate out of range");
      bb.block.coords.push_back(coord);
    }
    const Json& dirs = array_field(blocks[k], "directions", w);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      DirectionVector dv(b.layout);
      dv.values = vectorq_from(dirs[d], idx(w + ".directions", d));
      if (dv.values.size() != b.layout.dim()) fail(idx(w + ".directions", d), "length does not match the layout");
      bb.directions.push_back(std::move(dv));
    }
    bb.coefficients = rationals_from(field(blocks[k], "coefficients", w), w + ".coefficients");
    if (bb.coefficients.size() != bb.directions.size()) fail(w, "one coefficient per direction is required");
    b.blocks.push_back(std::move(bb));
  }
  const Json& prices = array_field(j, "interim_prices", where);
  for (std::size_t i = 0; i < prices.size(); ++i) b.interim_prices.push_back(rationals_from(prices[i], idx(where + ".interim_prices", i)));
  if (b.interim_prices.size() != counts.size()) fail(where + ".interim_prices", "expected one row per bidder");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (static_cast<int>(b.interim_prices[i].size()) != counts[i]) fail(idx(where + ".interim_prices", i), "expected one price per type");
  }
  const Json& prior = field(j, "prior", where);
  for (const auto& p : array_field(prior, "profiles", where + ".prior")) {
    std::vector<int> q;
    if (!p.is_array() || p.size() != counts.size()) fail(where + ".prior.profiles", "profile has the wrong number of bidders");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const int t = int_from(p[i], where + ".prior.profiles");
      if (t < 0 || t >= counts[i]) fail(where + ".prior.profiles", "type index out of range");
      q.push_back(t);
    }
    b.prior.profiles.push_back(std::move(q));
  }
  b.prior.weights = rationals_from(field(prior, "weights", where + ".prior"), where + ".prior.weights");
  if (b.prior.weights.size() != b.prior.profiles.size()) fail(where + ".prior", "one weight per profile is required");
  b.prior.sample_size = static_cast<std::size_t>(u64_from(field(prior, "sample_size", where + ".prior"), where + ".prior.sample_size"));
  b.oracle_name = field(j, "oracle", where).get<std::string>();
  b.alpha = rational_from(field(j, "alpha", where), where + ".alpha");
  b.seed = u64_from(field(j, "seed", where), where + ".seed");
  b.trials = static_cast<std::size_t>(u64_from(field(j, "trials", where), where + ".trials"));
  b.scale = rational_from(field(j, "scale", where), where + ".scale");
  return b;
}

Json audit_to_json(const AuditReport& a) {
  Json out;
  out["passed"] = a.passed;
  out["max_bic_regret"] = rational_json(a.max_bic_regret);
  out["max_ir_violation"] = rational_json(a.max_ir_violation);
  Json rows = Json::array();
  for (const auto& [key, r] : a.regrets) {
    const auto& [i, t, tp] = key;
    Json row{{"bidder", i}, {"type", t}};
    if (tp < 0) row["row"] = "ir";
    else row["report"] = tp;
    row["regret"] = rational_json(r);
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  return out;
}

SadpInstance sadp_from_json(const Json& j, std::optional<SetFamily>* family_out) {
  const std::string where = "sadp";
  SadpInstance inst;
  std::optional<SetFamily> family;
  inst.space = outcomes_from(field(j, "outcomes", where), family, where + ".outcomes");
  std::vector<Valuation> types;
  const Json& tj = array_field(j, "types", where);
  for (std::size_t k = 0; k < tj.size(); ++k) types.push_back(valuation_from(tj[k], inst.space, idx(where + ".types", k)));
  auto type_ref = [&](const Json& r, const std::string& w) -> const Valuation& {
    const int k = int_from(r, w);
    if (k < 0 || k >= static_cast<int>(types.size())) fail(w, "type reference out of range");
    return types[static_cast<std::size_t>(k)];
  };
  const Json& fs = array_field(j, "fs", where);
  if (fs.size() < 2) fail(where + ".fs", "at least two functions are required");
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const std::string w = idx(where + ".fs", k);
    ValuationSum f;
    const Json& coeffs = array_field(fs[k], "coeffs", w);
    for (std::size_t c = 0; c < coeffs.size(); ++c) {
      const std::string wc = idx(w + ".coeffs", c);
      if (!coeffs[c].is_array() || coeffs[c].size() != 2) fail(wc, "expected [coefficient, type_ref]");
      const Rational q = rational_from(coeffs[c][0], wc);
      if (q < 0) fail(wc, "coefficients must be non-negative");
      f.add(q, type_ref(coeffs[c][1], wc));
    }
    inst.fs.push_back(std::move(f));
  }
  if (j.contains("gs")) {
    std::vector<Valuation> gs;
    for (std::size_t k = 0; k < j["gs"].size(); ++k) gs.push_back(type_ref(j["gs"][k], idx(where + ".gs", k)));
    const int m = static_cast<int>(gs.size());
    inst.gs = std::move(gs);
    inst.cs = j.contains("cs") ? rationals_from(j["cs"], where + ".cs") : std::vector<Rational>(static_cast<std::size_t>(m), Rational(0));
    if (static_cast<int>(inst.cs->size()) != m) fail(where + ".cs", "expected one entry per g");
    inst.c0 = j.contains("c0") ? rational_from(j["c0"], where + ".c0") : Rational(0);
    inst.objective = j.contains("objective") ? objective_from_json(j["objective"], m, inst.space) : ObjectiveSpec::revenue(m);
  }
  if (family_out) *family_out = family;
  return inst;
}

Json sadp_to_json(const SadpInstance& inst) {
  Json out;
  out["outcomes"] = outcomes_json(inst.space, std::nullopt);
  Json types = Json::array();
  auto ref = [&](const Valuation& v) {
    types.push_back(valuation_json(v, inst.space));
    return static_cast<int>(types.size()) - 1;
  };
  Json fs = Json::array();
  for (const auto& f : inst.fs) {
    Json coeffs = Json::array();
    for (const auto& [c, v] : f.terms) coeffs.push_back(Json::array({rational_json(c), ref(v)}));
    fs.push_back(Json{{"coeffs", std::move(coeffs)}});
  }
  out["fs"] = std::move(fs);
  if (inst.gs) {
    Json gs = Json::array();
    for (const auto& g : *inst.gs) gs.push_back(ref(g));
    out["gs"] = std::move(gs);
    out["cs"] = vector_json(*inst.cs);
    out["c0"] = rational_json(inst.c0.value_or(Rational(0)));
    out["objective"] = objective_json_in(inst.objective, inst.space);
  }
  out["types"] = std::move(types);
  return out;
}

Json sadp_solution_json(const SadpSolution& s, const OutcomeSpace& space) {
  Json out;
  out["allocation"] = distribution_json(s.allocation, space);
  if (s.prices) out["prices"] = vector_json(*s.prices);
  if (s.achieved_index) out["achieved_index"] = *s.achieved_index;
  return out;
}

Json planted_to_json(const PlantedFamily& fam) {
  Json out;
  out["n"] = fam.n;
  out["k"] = fam.k();
  Json sets = Json::array();
  for (OutcomeId S : fam.planted) {
    Json items = Json::array();
    for (int j = 1; j <= fam.n; ++j) {
      if (S & (OutcomeId{1} << (j - 1))) items.push_back(j);
    }
    sets.push_back(std::move(items));
  }
  out["planted"] = std::move(sets);
  return out;
}

PlantedFamily planted_from_json(const Json& j) {
  const std::string where = "family";
  const int n = int_from(field(j, "n", where), where + ".n");
  std::vector<OutcomeId> sets;
  const Json& planted = array_field(j, "planted", where);
  for (std::size_t k = 0; k < planted.size(); ++k) {
    const std::string w = idx(where + ".planted", k);
    if (!planted[k].is_array()) fail(w, "expected a list of items");
    OutcomeId S = 0;
    for (const auto& item : planted[k]) {
      const int x = int_from(item, w);
      if (x < 1 || x > n) fail(w, "item out of range");
      S |= OutcomeId{1} << (x - 1);
    }
    sets.push_back(S);
  }
  return planted_family(n, std::move(sets));
}

Json certificate_to_json(const CompatCertificate& c, const OutcomeSpace& space) {
  Json out;
  out["Q"] = vector_json(c.Q);
  out["bits"] = c.bits;
  Json allocs = Json::array();
  for (const auto& d : c.allocations) allocs.push_back(distribution_json(d, space));
  out["allocations"] = std::move(allocs);
  auto matching = [](const MatchingCheck& m) {
    return Json{{"ok", m.ok}, {"assignment", m.assignment}, {"optimum", rational_json(m.optimum)},
                {"claimed", rational_json(m.claimed)}};
  };
  out["ok"] = c.report.ok;
  out["cyclic"] = matching(c.report.cyclic);
  Json windows = Json::array();
  for (const auto& w : c.report.windows) {
    Json wj = matching(w.check);
    wj["i"] = w.i;
    wj["j"] = w.j;
    windows.push_back(std::move(wj));
  }
  out["windows"] = std::move(windows);
  return out;
}

SadpOracle oracle_by_name(const std::string& name, const Instance& inst, const WsoOptions& wso) {
  if (name == "exact") return exact_sadp_oracle();
  if (name == "halved") return halved_sadp_oracle();
  if (name.rfind("fmmf:", 0) == 0) {
    if (!inst.family) throw ValidationError("oracle " + name + " needs a grid instance with a set family");
    if (name != "fmmf:" + inst.family->name()) throw ValidationError("oracle " + name + " does not match the instance family");
    return fmmf_sadp_oracle(MaxWeightOracle{*inst.family, Rational(1)}, wso);
  }
  throw ValidationError("unknown SADP oracle \"" + name + "\"");
}

}  // namespace mechkit
