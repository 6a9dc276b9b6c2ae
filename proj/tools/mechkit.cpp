// Command-line front end for the mechanism design kit.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mechkit/io.hpp"

using namespace mechkit;

namespace {

struct RunConfig {
  std::string command;
  std::string instance;
  std::uint64_t seed = 0;
  std::string epsilon = "1/100";
  std::size_t surrogate_size = 0;
  std::size_t trials = 0;
  unsigned precision_bits = 256;
  std::string out;

  std::string oracle = "exact";
  std::string engine = "cutting-plane";
  std::string blueprint;
  std::string profile;
  std::string family;
  int n = 4;
  int k = 3;
  bool serve = false;
  bool solve = false;
};

Rational epsilon_of(const RunConfig& c) {
  const Rational eps = parse_rational(c.epsilon);
  if (eps <= 0) throw ValidationError("--epsilon must be positive");
  return eps;
}

void check_config(const RunConfig& c) {
  epsilon_of(c);
  if (c.precision_bits < 64) throw ValidationError("--precision-bits must be at least 64");
}

Json config_json(const RunConfig& c) {
  return Json{{"seed", std::to_string(c.seed)}, {"epsilon", c.epsilon},   {"surrogate_size", c.surrogate_size},
              {"trials", c.trials},             {"precision_bits", c.precision_bits}, {"oracle", c.oracle},
              {"engine", c.engine}};
}

// JSON goes to --out when given (summary to stdout), otherwise to stdout (summary to stderr).
void emit(const RunConfig& c, const Json& j, const std::string& summary) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    std::cerr << summary;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ValidationError("cannot write " + c.out);
  f << text;
  std::cout << summary;
}

Instance load_instance(const RunConfig& c) {
  if (c.instance.empty()) throw ValidationError("--instance is required");
  return instance_from_json(read_json_file(c.instance));
}

MdmdpOptions mdmdp_options(const RunConfig& c) {
  MdmdpOptions opt;
  opt.epsilon = epsilon_of(c);
  opt.exact_prior = c.surrogate_size == 0;
  opt.surrogate_size = c.surrogate_size;
  opt.trials = c.trials;
  opt.seed = c.seed;
  if (c.engine == "ellipsoid") opt.engine = LpEngine::kEllipsoid;
  else if (c.engine != "cutting-plane") throw ValidationError("--engine must be cutting-plane or ellipsoid");
  opt.wso.precision_bits = c.precision_bits;
  opt.ellipsoid.precision_bits = c.precision_bits;
  return opt;
}

std::string q(const Rational& r) {
  std::ostringstream os;
  os << format_rational(r) << " (" << to_double(r) << ")";
  return os.str();
}

int solve(const RunConfig& c, Instance inst) {
  const MdmdpOptions opt = mdmdp_options(c);
  const SadpOracle G = oracle_by_name(c.oracle, inst, opt.wso);
  const MdmdpResult r = solve_mdmdp(inst.types, inst.outcomes, inst.objective, G, opt);
  Json out{{"command", c.command},
           {"config", config_json(c)},
           {"objective_kind", inst.objective.name},
           {"objective", {{"normalized", rational_json(r.objective)}, {"original", rational_json(r.objective_original)}}},
           {"lp_value", rational_json(r.lp_value)},
           {"scale", rational_json(r.blueprint.scale)},
           {"iterations", r.iterations},
           {"oracle_calls", r.oracle_calls},
           {"implicit", implicit_to_json(r.implicit)},
           {"lp_solution", implicit_to_json(r.lp_solution)},
           {"blueprint", blueprint_to_json(r.blueprint)},
           {"audit", audit_to_json(r.audit)}};
  std::ostringstream s;
  s << c.command << ": " << inst.objective.name << " " << q(r.objective_original) << " in original scale, "
    << q(r.objective) << " normalized (scale " << format_rational(r.blueprint.scale) << ")\n"
    << "  oracle " << G.name << ", " << r.iterations << " LP iterations, " << r.oracle_calls << " oracle calls\n"
    << "  audit " << (r.audit.passed ? "passed" : "FAILED") << ", max BIC regret " << q(r.audit.max_bic_regret) << "\n";
  emit(c, out, s.str());
  return 0;
}

int cmd_solve_revenue(const RunConfig& c) {
  Instance inst = load_instance(c);
  inst.objective = ObjectiveSpec::revenue(inst.types.bidders());
  return solve(c, std::move(inst));
}

int cmd_solve_general(const RunConfig& c) { return solve(c, load_instance(c)); }

int cmd_solve_fmmf(RunConfig c) {
  Instance inst = load_instance(c);
  if (!inst.family) throw ValidationError("solve-fmmf needs a grid instance with a set family");
  inst.objective = ObjectiveSpec::fmmf(inst.types.bidders());
  if (c.oracle == "exact") c.oracle = "fmmf:" + inst.family->name();
  return solve(c, std::move(inst));
}

int cmd_sadp_solve(const RunConfig& c) {
  if (c.instance.empty()) throw ValidationError("--instance is required");
  std::optional<SetFamily> family;
  const SadpInstance inst = sadp_from_json(read_json_file(c.instance), &family);
  Instance shell;
  shell.outcomes = inst.space;
  shell.family = family;
  const SadpOracle G = oracle_by_name(c.oracle, shell);
  CounterRng rng(c.seed);
  const SadpSolution sol = G.solver(inst, rng);
  const SadpSolution best = brute_force_sadp(inst);
  const Rational value = instance_value(inst, sol), optimum = instance_value(inst, best);
  Json out{{"command", c.command},
           {"config", config_json(c)},
           {"solution", sadp_solution_json(sol, inst.space)},
           {"value", rational_json(value)},
           {"optimum", rational_json(optimum)},
           {"ratio", rational_json(certify_ratio(inst, sol, best))}};
  emit(c, out, "sadp-solve: value " + q(value) + ", optimum " + q(optimum) + "\n");
  return 0;
}

int cmd_brute_force(const RunConfig& c) {
  const Instance inst = load_instance(c);
  const auto r = brute_force_mechanism(inst.types, inst.outcomes, inst.objective);
  Json allocs = Json::array();
  const auto profiles = inst.types.profiles();
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    allocs.push_back(Json{{"profile", profiles[p]}, {"allocation", distribution_json(r.allocations[p], inst.outcomes)}});
  }
  Json out{{"command", c.command},
           {"objective_kind", inst.objective.name},
           {"optimum", rational_json(r.value)},
           {"implicit", implicit_to_json(r.implicit)},
           {"allocations", std::move(allocs)}};
  emit(c, out, "brute-force: optimal " + inst.objective.name + " " + q(r.value) + "\n");
  return 0;
}

Json blueprint_doc(const RunConfig& c) {
  if (c.blueprint.empty()) throw ValidationError("--blueprint is required");
  Json j = read_json_file(c.blueprint);
  // Accept a full solver result as well as a bare blueprint.
  return j.contains("blueprint") ? j : Json{{"blueprint", j}};
}

int cmd_audit(const RunConfig& c) {
  const Instance inst = load_instance(c);
  const Json doc = blueprint_doc(c);
  const MechanismBlueprint b = blueprint_from_json(doc["blueprint"], inst);
  const ImplicitForm f = replay_blueprint(b, inst.types, inst.outcomes, oracle_by_name(b.oracle_name, inst));
  const AuditReport a = audit_epsilon_bic(f, epsilon_of(c));
  Json out{{"command", c.command}, {"epsilon", c.epsilon}, {"audit", audit_to_json(a)}};
  emit(c, out,
       std::string("audit: ") + (a.passed ? "passed" : "FAILED") + ", max BIC regret " + q(a.max_bic_regret) +
           ", max IR violation " + q(a.max_ir_violation) + "\n");
  return a.passed ? 0 : 1;
}

int cmd_verify(const RunConfig& c) {
  const Instance inst = load_instance(c);
  const Json doc = blueprint_doc(c);
  if (!doc.contains("implicit")) throw ValidationError("verify needs a solver result with an \"implicit\" field");
  const MechanismBlueprint b = blueprint_from_json(doc["blueprint"], inst);
  const ImplicitForm f = replay_blueprint(b, inst.types, inst.outcomes, oracle_by_name(b.oracle_name, inst));
  const std::string replayed = implicit_to_json(f).dump();
  const std::string stored = doc["implicit"].dump();
  const bool same = replayed == stored;
  Json out{{"command", c.command}, {"identical", same}, {"implicit", implicit_to_json(f)}};
  emit(c, out, same ? "verify: replayed implicit form is byte-identical\n" : "verify: replayed implicit form DIFFERS\n");
  return same ? 0 : 1;
}

int cmd_run(const RunConfig& c) {
  const Instance inst = load_instance(c);
  const MechanismBlueprint b = blueprint_from_json(blueprint_doc(c)["blueprint"], inst);
  std::vector<int> profile;
  std::stringstream ss(c.profile);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      profile.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ValidationError("--profile expects comma-separated type indices");
    }
  }
  const MechanismOutcome m = run_mechanism(b, profile, inst.types, inst.outcomes, oracle_by_name(b.oracle_name, inst), c.seed);
  Json prices = Json::array();
  for (const auto& p : m.prices) prices.push_back(rational_json(p));
  Json out{{"command", c.command},
           {"seed", std::to_string(c.seed)},
           {"profile", profile},
           {"outcome", inst.outcomes.label_of(m.outcome)},
           {"prices", std::move(prices)},
           {"direction", m.direction}};
  emit(c, out, "run: outcome " + inst.outcomes.label_of(m.outcome) + "\n");
  return 0;
}

// Answers {"op":"value","i":..,"set":[..]} and {"op":"demand","i":..,"prices":[..]} lines on stdin.
int serve_oracle(const PlantedFamily& fam) {
  std::size_t value_queries = 0, demand_queries = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json reply;
    try {
      const Json qj = parse_json(line, "query");
      const std::string op = qj.value("op", "");
      const int i = qj.value("i", 0);
      if (op == "value") {
        OutcomeId S = 0;
        for (const auto& x : qj.at("set")) {
          const int item = x.get<int>();
          if (item < 1 || item > fam.n) throw ValidationError("item out of range");
          S |= OutcomeId{1} << (item - 1);
        }
        reply["value"] = rational_json(value_oracle(fam, i, S));
        ++value_queries;
      } else if (op == "demand") {
        std::vector<Rational> p;
        for (const auto& x : qj.at("prices")) p.push_back(rational_from(x, "prices"));
        const OutcomeId S = demand_oracle(fam, i, p);
        Json items = Json::array();
        for (int j = 1; j <= fam.n; ++j) {
          if (S & (OutcomeId{1} << (j - 1))) items.push_back(j);
        }
        reply["set"] = std::move(items);
        ++demand_queries;
      } else {
        throw ValidationError("op must be value or demand");
      }
    } catch (const std::exception& e) {
      reply = Json{{"error", e.what()}};
    }
    std::cout << reply.dump() << std::endl;
  }
  std::cout << Json{{"value_queries", value_queries}, {"demand_queries", demand_queries}}.dump() << std::endl;
  return 0;
}

int cmd_gen_hard(const RunConfig& c) {
  const PlantedFamily fam = random_planted_family(c.n, c.k, c.seed);
  if (c.serve) return serve_oracle(fam);
  Json out = planted_to_json(fam);
  out["seed"] = std::to_string(c.seed);
  Json Q = Json::array();
  for (const auto& x : hardness_multipliers(c.n, c.k)) Q.push_back(rational_json(x));
  out["multipliers"] = std::move(Q);
  emit(c, out, "gen-hard: n = " + std::to_string(c.n) + ", k = " + std::to_string(c.k) + "\n");
  return 0;
}

int cmd_reduce_sadp(const RunConfig& c) {
  const PlantedFamily fam = c.family.empty() ? random_planted_family(c.n, c.k, c.seed) : planted_from_json(read_json_file(c.family));
  const ReducedMdmdp red = hard_mdmdp(fam);
  Instance inst{red.types, red.space, ObjectiveSpec::revenue(1), std::nullopt};
  Json out{{"command", c.command},
           {"family", planted_to_json(fam)},
           {"instance", instance_to_json(inst)},
           {"certificate", certificate_to_json(red.certificate, red.space)}};
  std::ostringstream s;
  s << "reduce-sadp: certificate " << (red.certificate.report.ok ? "verified" : "FAILED") << ", largest multiplier "
    << red.certificate.bits << " bits\n";
  if (c.solve) {
    const auto fs = planted_functions(fam);
    const auto mech = brute_force_mechanism(red.types, red.space, ObjectiveSpec::revenue(1));
    const auto bal = d_balance(fs, red.space);
    if (!bal.D) throw ContractError("planted family is not balanced");
    const Extraction ex = extract_sadp_solution(mech.allocations, fs, Rational(1), *bal.D, fam.k());
    const int l = *ex.solution.achieved_index;
    out["extraction"] = Json{{"revenue", rational_json(mech.value)},
                             {"D", rational_json(*bal.D)},
                             {"index", l},
                             {"solution", sadp_solution_json(ex.solution, red.space)},
                             {"difference", rational_json(ex.differences[static_cast<std::size_t>(l - 1)])},
                             {"ratio_bound", rational_json(ex.ratio_bound)}};
    s << "  extracted f_" << l << " - f_" << l + 1 << " = " << q(ex.differences[static_cast<std::size_t>(l - 1)])
      << ", guaranteed ratio " << format_rational(ex.ratio_bound) << "\n";
  }
  emit(c, out, s.str());
  return 0;
}

void common_options(CLI::App* app, RunConfig& c) {
  app->add_option("--instance", c.instance, "Instance JSON file")->envname("MECHKIT_INSTANCE");
  app->add_option("--seed", c.seed, "Master seed")->envname("MECHKIT_SEED");
  app->add_option("--epsilon", c.epsilon, "Accuracy epsilon as a rational, e.g. 1/100")->envname("MECHKIT_EPSILON");
  app->add_option("--surrogate-size", c.surrogate_size, "Sampled surrogate prior size M (0 uses the exact prior)")
      ->envname("MECHKIT_SURROGATE_SIZE");
  app->add_option("--trials", c.trials, "Derandomization trials (0 derives from epsilon)")->envname("MECHKIT_TRIALS");
  app->add_option("--precision-bits", c.precision_bits, "Working precision of the geometry")
      ->envname("MECHKIT_PRECISION_BITS");
  app->add_option("--out", c.out, "Write the JSON result here")->envname("MECHKIT_OUT");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian mechanism design through SADP oracles"};
  app.require_subcommand(1);
  RunConfig c;

  struct Command {
    const char* name;
    const char* help;
    std::function<int(const RunConfig&)> run;
  };
  const std::vector<Command> commands{
      {"solve-revenue", "Revenue-optimal mechanism through the SADP reduction", cmd_solve_revenue},
      {"solve-general", "Mechanism for the instance's objective", cmd_solve_general},
      {"solve-fmmf", "Fractional max-min fair mechanism with a max-weight oracle", cmd_solve_fmmf},
      {"sadp-solve", "Solve one SADP instance", cmd_sadp_solve},
      {"brute-force", "Exact optimum by the dense LP", cmd_brute_force},
      {"audit", "Replay a blueprint and audit epsilon-BIC and IR", cmd_audit},
      {"run", "Run a saved mechanism on one reported profile", cmd_run},
      {"gen-hard", "Generate a planted submodular family", cmd_gen_hard},
      {"reduce-sadp", "Reduce a planted family to a single-bidder instance", cmd_reduce_sadp},
      {"verify", "Replay a saved result and compare implicit forms", cmd_verify},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    common_options(sub, c);
    const std::string name = cmd.name;
    if (name.rfind("solve-", 0) == 0 || name == "sadp-solve") {
      sub->add_option("--oracle", c.oracle, "SADP oracle: exact, halved or fmmf:<family>");
    }
    if (name.rfind("solve-", 0) == 0) sub->add_option("--engine", c.engine, "cutting-plane or ellipsoid");
    if (name == "audit" || name == "run" || name == "verify") {
      sub->add_option("--blueprint", c.blueprint, "Solver result or blueprint JSON")->envname("MECHKIT_BLUEPRINT");
    }
    if (name == "run") sub->add_option("--profile", c.profile, "Reported type indices, comma separated")->required();
    if (name == "gen-hard" || name == "reduce-sadp") {
      sub->add_option("--n", c.n, "Items");
      sub->add_option("--k", c.k, "Functions");
    }
    if (name == "gen-hard") sub->add_flag("--serve", c.serve, "Answer value and demand queries on stdin, hiding the planted sets");
    if (name == "reduce-sadp") {
      sub->add_option("--family", c.family, "Planted family JSON from gen-hard");
      sub->add_flag("--solve", c.solve, "Solve the reduced instance exactly and extract a SADP solution");
    }
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      c.command = cmd->name;
      check_config(c);
      return cmd->run(c);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
