#ifndef MECHKIT_IO_HPP
#define MECHKIT_IO_HPP

#include <optional>
#include <string>

#include "json.hpp"
#include "mechkit/brute_force.hpp"
#include "mechkit/fmmf.hpp"
#include "mechkit/hardness.hpp"
#include "mechkit/mdmdp.hpp"

namespace mechkit {

using Json = nlohmann::ordered_json;

/** Parses JSON text; syntax errors become ValidationError with line and column. */
Json parse_json(const std::string& text, const std::string& source = "input");
Json read_json_file(const std::string& path);

/** Rationals travel as "num/den" strings; integers are also accepted on input. */
Json rational_json(const Rational& q);
Rational rational_from(const Json& j, const std::string& where);

/** A mechanism design instance as read from disk. */
struct Instance {
  TypeSpace types;
  OutcomeSpace outcomes;
  ObjectiveSpec objective;
  /** Set for grid outcome spaces, which are built from a family. */
  std::optional<SetFamily> family;
};

/**
 * Reads either the general instance schema
 *   {"bidders":[{"types":[{"values":{...}} | {"additive":[[...]]}], "prior":[...]}],
 *    "outcomes":{"kind":"explicit","ids":[...]} | {"kind":"lattice","n":..} | {"kind":"grid",...},
 *    "objective":{"kind":"revenue"|"welfare"|"fmmf"|"general","pieces":[...]}}
 * or the FMMF shorthand {"m":..,"n":..,"family":..,"values":[[...]],"prior":...}.
 */
Instance instance_from_json(const Json& j);
Json instance_to_json(const Instance& inst);

SetFamily family_from_json(const Json& j, int m, int n, const std::string& where);
Json family_to_json(const SetFamily& f);

Json objective_to_json(const ObjectiveSpec& obj);
ObjectiveSpec objective_from_json(const Json& j, int bidders, const OutcomeSpace& space);

Json distribution_json(const Distribution& d, const OutcomeSpace& space);
Distribution distribution_from(const Json& j, const OutcomeSpace& space, const std::string& where);

Json implicit_to_json(const ImplicitForm& f);
ImplicitForm implicit_from_json(const Json& j);

Json blueprint_to_json(const MechanismBlueprint& b);
MechanismBlueprint blueprint_from_json(const Json& j, const Instance& inst);

Json audit_to_json(const AuditReport& a);

/**
 * SADP instance schema: {"outcomes":..,"types":[valuation...],
 *  "fs":[{"coeffs":[["num/den", type_ref],...]}],"gs":[type_ref,...],"cs":[...],"c0":..,"objective":..}.
 */
SadpInstance sadp_from_json(const Json& j, std::optional<SetFamily>* family = nullptr);
Json sadp_to_json(const SadpInstance& inst);
Json sadp_solution_json(const SadpSolution& s, const OutcomeSpace& space);

Json planted_to_json(const PlantedFamily& fam);
PlantedFamily planted_from_json(const Json& j);
Json certificate_to_json(const CompatCertificate& c, const OutcomeSpace& space);

/** Oracle named in a blueprint ("exact", "halved" or "fmmf:<family>"), rebuilt for an instance. */
SadpOracle oracle_by_name(const std::string& name, const Instance& inst, const WsoOptions& wso = {});

}  // namespace mechkit

#endif  // MECHKIT_IO_HPP
