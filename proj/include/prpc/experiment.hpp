#pragma once

// Batch experiment runner. Parses a JSON experiment config, dispatches to the
// library, and writes a reproducible artifact directory:
//
//   manifest.json   config echo, toolkit version, work counters, file checksums
//   result.json     command-specific results
//   trace.csv       multiplier-search traces (lambda, w, loss, violations, stored)
//   curve-*.dat     two-column plot-ready numeric data
//   summary.txt     demo signature report
//
// Reruns with identical config and seed are byte-identical, so nothing here
// may depend on wall clock, locale, or iteration order of unordered
// containers. Work counters in the manifest are deterministic evaluation
// counts, not wall-clock timings, for the same reason.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prpc/analysis.hpp"
#include "prpc/core.hpp"
#include "prpc/errors.hpp"
#include "prpc/instances.hpp"
#include "prpc/search.hpp"
#include "prpc/solvers.hpp"
#include "prpc/version.hpp"

namespace prpc {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting

/// Round-trip-exact decimal rendering for CSV and .dat files.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  return hash;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// JSON views of domain types

inline json to_json(const SolveResult& r) {
  json j;
  j["w"] = r.w.w;
  j["loss"] = r.loss;
  j["violation"] = r.violation;
  j["reg_objective"] = r.reg_objective;
  j["provenance"] = to_string(r.provenance);
  j["converged"] = r.converged;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline json to_json(const Pr4pcOutcome& outcome) {
  json j;
  j["attempts"] = outcome.trace.size();
  j["stored"] = json::array();
  for (std::size_t idx : outcome.stored) {
    json entry;
    entry["lambda"] = outcome.trace[idx].lambda.lambda;
    entry["result"] = to_json(outcome.trace[idx].result);
    j["stored"].push_back(std::move(entry));
  }
  if (outcome.winner) {
    json w;
    w["lambda"] = outcome.winner_entry().lambda.lambda;
    w["result"] = to_json(outcome.winner_entry().result);
    j["winner"] = std::move(w);
  } else {
    j["winner"] = nullptr;
    j["status"] = "no multiplier found";
  }
  if (!outcome.notes.empty()) j["notes"] = outcome.notes;
  return j;
}

inline json to_json(const MultiplierInterval& interval) {
  json j;
  j["lower"] = interval.lower;
  j["upper"] = std::isinf(interval.upper) ? json("inf") : json(interval.upper);
  j["feasible"] = interval.feasible;
  if (interval.binding_lower_witness) j["binding_lower_witness"] = interval.binding_lower_witness->w;
  if (interval.binding_upper_witness) j["binding_upper_witness"] = interval.binding_upper_witness->w;
  if (interval.infeasibility_witness) j["infeasibility_witness"] = interval.infeasibility_witness->w;
  return j;
}

/// The multiplier-search trace as CSV: lambda components, w components, loss,
/// violations, stored flag. 17 significant digits, '.' decimal, no locale.
inline std::string trace_csv(const Problem& p, const Pr4pcOutcome& outcome) {
  std::string out;
  for (std::size_t j = 0; j < p.num_constraints; ++j) out += "lambda_" + std::to_string(j) + ",";
  for (std::size_t k = 0; k < p.dim; ++k) out += "w_" + std::to_string(k) + ",";
  out += "loss,";
  for (std::size_t j = 0; j < p.num_constraints; ++j) out += "violation_" + std::to_string(j) + ",";
  out += "stored\n";
  for (const Pr4pcEntry& entry : outcome.trace) {
    for (double v : entry.lambda.lambda) out += fmt17(v) + ",";
    for (double v : entry.result.w.w) out += fmt17(v) + ",";
    out += fmt17(entry.result.loss) + ",";
    for (double v : entry.result.violation) out += fmt17(v) + ",";
    out += entry.stored ? "1\n" : "0\n";
  }
  return out;
}

/// Two-column plot data, one (x, y) pair per line.
inline std::string curve_dat(const std::vector<std::pair<double, double>>& points) {
  std::string out;
  for (const auto& [x, y] : points) out += fmt17(x) + " " + fmt17(y) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Artifact writing

struct RunArtifact {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // everything written, manifest included
  int exit_code = 0;               // 0 ok, 4 requested feasibility unmet
};

/// Collects output files in memory, then writes them plus a manifest listing
/// every file with its checksum.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, json config_echo, std::uint64_t seed)
      : dir_(std::move(dir)), config_(std::move(config_echo)), seed_(seed) {
    std::filesystem::create_directories(dir_);
  }

  void add(const std::string& name, std::string content) {
    files_[name] = std::move(content);
  }
  void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
  void add_work(const std::string& key, long long amount) { work_[key] += amount; }

  RunArtifact finalize(int exit_code) {
    json manifest;
    manifest["config"] = config_;
    manifest["seed"] = seed_;
    manifest["toolkit"] = {{"name", "prpc"}, {"version", PRPC_VERSION}};
    json work = json::object();
    for (const auto& [key, amount] : work_) work[key] = amount;
    manifest["work"] = std::move(work);
    json file_list = json::array();
    for (const auto& [name, content] : files_) {
      file_list.push_back({{"name", name},
                           {"bytes", content.size()},
                           {"checksum_fnv1a64", hex64(fnv1a64(content))}});
    }
    manifest["files"] = std::move(file_list);

    RunArtifact artifact;
    artifact.output_dir = dir_;
    artifact.exit_code = exit_code;
    for (const auto& [name, content] : files_) {
      write_file(dir_ / name, content);
      artifact.files.push_back(name);
    }
    write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
    artifact.files.push_back("manifest.json");
    return artifact;
  }

 private:
  static void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }

  std::filesystem::path dir_;
  json config_;
  std::uint64_t seed_;
  std::map<std::string, std::string> files_;   // ordered: deterministic manifest
  std::map<std::string, long long> work_;
};

// ---------------------------------------------------------------------------
// Config schema

namespace cfg {

inline void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

inline void check_keys(const json& obj, const std::set<std::string>& required,
                       const std::set<std::string>& optional, const std::string& where) {
  expect_object(obj, where);
  for (const auto& key : required) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!required.count(key) && !optional.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

inline double number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError("key '" + key + "' must be a number");
  return obj[key].get<double>();
}

inline long long integer(const json& obj, const std::string& key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
  return obj[key].get<long long>();
}

inline std::string text(const json& obj, const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw ConfigError("key '" + key + "' must be a string");
  }
  return obj[key].get<std::string>();
}

inline std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline InstanceSpec instance_spec(const json& obj) {
  check_keys(obj, {"name"}, {"params"}, "instance");
  InstanceSpec spec;
  spec.name = text(obj, "name");
  if (obj.contains("params")) {
    expect_object(obj["params"], "instance.params");
    for (const auto& [key, value] : obj["params"].items()) {
      if (!value.is_number()) throw ConfigError("instance.params." + key + ": must be a number");
      spec.params[key] = value.get<double>();
    }
  }
  return spec;
}

inline SolverChoice solver_choice(const json& root, int threads_override) {
  SolverChoice solver;
  solver.grid.threads = 0;  // batch runs default to machine parallelism
  if (root.contains("solver")) {
    const json& obj = root["solver"];
    expect_object(obj, "solver");
    const std::string kind =
        obj.contains("kind") ? text(obj, "kind") : std::string("grid");
    if (kind == "grid") {
      check_keys(obj, {}, {"kind", "points_per_dim", "budget", "tie_break", "threads"}, "solver");
      solver.kind = SolverChoice::Kind::grid;
      solver.grid.points_per_dim = static_cast<int>(integer(obj, "points_per_dim", 1001));
      solver.grid.budget = integer(obj, "budget", solver.grid.budget);
      solver.grid.threads = static_cast<int>(integer(obj, "threads", 0));
      if (obj.contains("tie_break")) {
        const std::string tb = text(obj, "tie_break");
        if (tb == "prefer_low_violation") {
          solver.grid.tie_break = TieBreak::prefer_low_violation;
        } else if (tb == "prefer_high_violation") {
          solver.grid.tie_break = TieBreak::prefer_high_violation;
        } else {
          throw ConfigError("solver.tie_break: unknown value '" + tb + "'");
        }
      }
    } else if (kind == "descent") {
      check_keys(obj, {},
                 {"kind", "step_size", "max_iters", "grad_tolerance", "restarts", "seed",
                  "fd_step"},
                 "solver");
      solver.kind = SolverChoice::Kind::descent;
      solver.descent.step_size = number(obj, "step_size", solver.descent.step_size);
      solver.descent.max_iters = static_cast<int>(integer(obj, "max_iters", solver.descent.max_iters));
      solver.descent.grad_tolerance = number(obj, "grad_tolerance", solver.descent.grad_tolerance);
      solver.descent.restarts = static_cast<int>(integer(obj, "restarts", solver.descent.restarts));
      solver.descent.seed = static_cast<std::uint64_t>(integer(obj, "seed", 0));
      solver.descent.fd_step = number(obj, "fd_step", 0.0);
    } else {
      throw ConfigError("solver.kind: unknown value '" + kind + "'");
    }
  }
  if (threads_override > 0) solver.grid.threads = threads_override;
  return solver;
}

inline LambdaStrategy strategy(const json& obj, std::size_t m) {
  expect_object(obj, "strategy");
  const std::string kind = text(obj, "kind");
  if (kind == "explicit_list") {
    check_keys(obj, {"kind", "list"}, {}, "strategy");
    if (!obj["list"].is_array() || obj["list"].empty()) {
      throw ConfigError("strategy.list: expected a non-empty array");
    }
    std::vector<Multipliers> list;
    for (const auto& entry : obj["list"]) {
      std::vector<double> lambda =
          entry.is_number() ? std::vector<double>{entry.get<double>()}
                            : number_array(entry, "strategy.list entry");
      if (lambda.size() != m) throw ConfigError("strategy.list entry: wrong multiplier count");
      list.push_back(Multipliers{std::move(lambda)});
    }
    return LambdaStrategy::explicit_list(std::move(list));
  }
  if (kind == "log_grid") {
    check_keys(obj, {"kind"}, {"lo", "hi", "count"}, "strategy");
    return LambdaStrategy::logarithmic(number(obj, "lo", 1e-3), number(obj, "hi", 1e3),
                                       static_cast<int>(integer(obj, "count", 16)));
  }
  if (kind == "binary_search") {
    check_keys(obj, {"kind", "lambda_lo", "lambda_hi"}, {"tolerance"}, "strategy");
    return LambdaStrategy::bisect(number(obj, "lambda_lo", 0.0), number(obj, "lambda_hi", 1.0),
                                  number(obj, "tolerance", 1e-6));
  }
  if (kind == "dual_ascent") {
    check_keys(obj, {"kind", "lambda0", "eta", "iterations"}, {}, "strategy");
    std::vector<double> lambda0 = number_array(obj["lambda0"], "strategy.lambda0");
    if (lambda0.size() != m) throw ConfigError("strategy.lambda0: wrong multiplier count");
    return LambdaStrategy::dual(Multipliers{std::move(lambda0)}, number(obj, "eta", 1.0),
                                static_cast<int>(integer(obj, "iterations", 50)));
  }
  throw ConfigError("strategy.kind: unknown value '" + kind + "'");
}

struct LambdaGridRange {
  double lo = 1e-3;
  double hi = 1e3;
  int count = 200;
};

inline LambdaGridRange lambda_grid_range(const json& root) {
  LambdaGridRange range;
  if (root.contains("lambda_grid")) {
    const json& obj = root["lambda_grid"];
    check_keys(obj, {}, {"lo", "hi", "count"}, "lambda_grid");
    range.lo = number(obj, "lo", range.lo);
    range.hi = number(obj, "hi", range.hi);
    range.count = static_cast<int>(integer(obj, "count", range.count));
  }
  return range;
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Experiment runner

namespace detail {

inline const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>>&
command_schema() {
  // command -> (required keys, optional keys), on top of the common ones
  static const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>>
      schema = {
          {"solve-pr", {{"lambda"}, {"solver"}}},
          {"solve-pc", {{"theta"}, {"solver"}}},
          {"pr4pc", {{"theta", "strategy"}, {"solver"}}},
          {"theorem1", {{"lambda"}, {"solver"}}},
          {"attainability", {{}, {"lambda", "w_star", "lambda_grid", "component", "lambda_other", "solver"}}},
          {"monotonicity", {{"lambda_list"}, {"component", "solver"}}},
          {"sensitivity", {{"theta_list"}, {"lambda_grid", "solver"}}},
          {"demo", {{"name"}, {}}},
      };
  return schema;
}

inline void require_grid_solver(const SolverChoice& solver, const std::string& command) {
  if (solver.kind != SolverChoice::Kind::grid) {
    throw ConfigError(command + ": requires the grid solver");
  }
}

inline double accuracy_against_targets(const std::vector<double>& outputs,
                                       const std::vector<double>& targets) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double predicted = outputs[i] >= 0.5 ? 1.0 : 0.0;
    if (predicted == targets[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(outputs.size());
}

}  // namespace detail

RunArtifact demo(const std::string& name, const std::filesystem::path& out_dir,
                 std::uint64_t seed = 0, int threads = 0);

/// Validate and execute one experiment config. Throws ConfigError /
/// BudgetExceeded for rejected configs; infeasible outcomes of commands that
/// request feasibility are reported through RunArtifact::exit_code == 4.
inline RunArtifact run_experiment(const json& config, int threads_override = 0,
                                  long long budget_override = 0) {
  cfg::expect_object(config, "config");
  if (!config.contains("command")) throw ConfigError("config: missing required key 'command'");
  const std::string command = cfg::text(config, "command");
  const auto& schema = detail::command_schema();
  const auto it = schema.find(command);
  if (it == schema.end()) throw ConfigError("config: unknown command '" + command + "'");

  std::set<std::string> required = it->second.first;
  std::set<std::string> optional = it->second.second;
  required.insert("command");
  required.insert("output_dir");
  if (command == "demo") {
    optional.insert({"seed", "threads"});
  } else {
    required.insert("instance");
    optional.insert({"seed", "threads", "tolerance"});
  }
  cfg::check_keys(config, required, optional, "config");

  const auto seed = static_cast<std::uint64_t>(cfg::integer(config, "seed", 0));
  int threads = static_cast<int>(cfg::integer(config, "threads", 0));
  if (threads_override > 0) threads = threads_override;
  const double tol = cfg::number(config, "tolerance", kOptimalityTol);
  const std::filesystem::path out_dir(cfg::text(config, "output_dir"));

  if (command == "demo") {
    return demo(cfg::text(config, "name"), out_dir, seed, threads);
  }

  const Problem problem = make_instance(cfg::instance_spec(config["instance"]));
  SolverChoice solver = cfg::solver_choice(config, threads);
  if (budget_override > 0) solver.grid.budget = budget_override;
  if (solver.kind == SolverChoice::Kind::descent && solver.descent.seed == 0) {
    solver.descent.seed = seed;
  }

  ArtifactWriter writer(out_dir, config, seed);
  int exit_code = 0;
  json result;
  result["command"] = command;
  result["instance"] = problem.name;

  if (command == "solve-pr") {
    const Multipliers lambda{cfg::number_array(config["lambda"], "lambda")};
    const SolveResult r = solve_pr(problem, lambda, solver);
    result["lambda"] = lambda.lambda;
    result["result"] = to_json(r);
    if (solver.kind == SolverChoice::Kind::grid) {
      writer.add_work("grid_evaluations", grid_size(problem, solver.grid));
    }
    writer.add_work("pr_solves", 1);
  } else if (command == "solve-pc") {
    detail::require_grid_solver(solver, command);
    const Threshold theta{cfg::number_array(config["theta"], "theta")};
    const std::optional<SolveResult> r = solve_pc_grid(problem, theta, solver.grid);
    result["theta"] = theta.theta;
    result["feasible"] = r.has_value();
    if (r) {
      result["result"] = to_json(*r);
    } else {
      result["result"] = nullptr;
      result["status"] = "infeasible on grid";
      exit_code = 4;
    }
    writer.add_work("grid_evaluations", grid_size(problem, solver.grid));
  } else if (command == "pr4pc") {
    const Threshold theta{cfg::number_array(config["theta"], "theta")};
    const LambdaStrategy strat = cfg::strategy(config["strategy"], problem.num_constraints);
    const Pr4pcOutcome outcome = pr4pc(problem, theta, strat, solver);
    result["theta"] = theta.theta;
    result["outcome"] = to_json(outcome);
    writer.add("trace.csv", trace_csv(problem, outcome));
    if (problem.num_constraints == 1) {
      std::vector<std::pair<double, double>> c_curve, l_curve;
      for (const Pr4pcEntry& entry : outcome.trace) {
        c_curve.emplace_back(entry.lambda[0], entry.result.violation[0]);
        l_curve.emplace_back(entry.lambda[0], entry.result.loss);
      }
      writer.add("curve-violation-vs-lambda.dat", curve_dat(c_curve));
      writer.add("curve-loss-vs-lambda.dat", curve_dat(l_curve));
    }
    if (solver.kind == SolverChoice::Kind::grid) {
      writer.add_work("grid_evaluations",
                      grid_size(problem, solver.grid) *
                          static_cast<long long>(outcome.trace.size()));
    }
    writer.add_work("pr_solves", static_cast<long long>(outcome.trace.size()));
    if (outcome.no_multiplier_found()) exit_code = 4;
  } else if (command == "theorem1") {
    detail::require_grid_solver(solver, command);
    const Multipliers lambda{cfg::number_array(config["lambda"], "lambda")};
    const Theorem1Report report = check_theorem1(problem, lambda, solver.grid, tol);
    result["lambda"] = lambda.lambda;
    result["holds"] = report.holds;
    result["optimum"] = to_json(report.optimum);
    result["details"] = report.details;
    if (report.counterexample) {
      result["counterexample"] = report.counterexample->w;
      result["counterexample_loss"] = report.counterexample_loss;
    }
    writer.add_work("grid_evaluations", 2 * grid_size(problem, solver.grid));
  } else if (command == "attainability") {
    detail::require_grid_solver(solver, command);
    const bool has_lambda = config.contains("lambda");
    const bool has_w_star = config.contains("w_star");
    if (has_lambda == has_w_star) {
      throw ConfigError("attainability: provide exactly one of 'lambda' or 'w_star'");
    }
    Assignment w_star;
    if (has_w_star) {
      w_star = Assignment{cfg::number_array(config["w_star"], "w_star")};
    } else {
      const Multipliers lambda{cfg::number_array(config["lambda"], "lambda")};
      w_star = solve_pr_grid(problem, lambda, solver.grid).w;
      result["lambda"] = lambda.lambda;
      writer.add_work("grid_evaluations", grid_size(problem, solver.grid));
    }
    const AttainabilityHalfspaces hs = attainability_halfspaces(problem, w_star, solver.grid, tol);
    result["w_star"] = w_star.w;
    result["num_halfspaces"] = hs.halfspaces.size();
    result["optimality_violations"] = json::array();
    for (const HalfSpace& v : hs.optimality_violations) {
      result["optimality_violations"].push_back({{"witness", v.witness.w}, {"delta_l", v.delta_l}});
    }
    const auto component = static_cast<std::size_t>(cfg::integer(config, "component", 0));
    std::vector<double> lambda_other;
    if (config.contains("lambda_other")) {
      lambda_other = cfg::number_array(config["lambda_other"], "lambda_other");
    }
    if (lambda_other.size() + 1 != problem.num_constraints) {
      throw ConfigError("attainability: lambda_other must fix the other m-1 components");
    }
    result["component"] = component;
    result["interval"] = to_json(multiplier_interval(hs.halfspaces, component, lambda_other));
    const cfg::LambdaGridRange range = cfg::lambda_grid_range(config);
    const RegionScan scan = multiplier_region_feasible(
        hs.halfspaces,
        log_lambda_candidates(problem.num_constraints, range.lo, range.hi, range.count), tol);
    result["region"] = {{"candidates_tested", range.count},
                        {"feasible_count", scan.feasible_points.size()},
                        {"any", scan.any}};
    writer.add_work("grid_evaluations", grid_size(problem, solver.grid));
  } else if (command == "monotonicity") {
    const auto component = static_cast<std::size_t>(cfg::integer(config, "component", 0));
    if (!config["lambda_list"].is_array() || config["lambda_list"].size() < 2) {
      throw ConfigError("monotonicity: lambda_list must hold at least two multipliers");
    }
    std::vector<Multipliers> lambdas;
    for (const auto& entry : config["lambda_list"]) {
      std::vector<double> lambda = entry.is_number()
                                       ? std::vector<double>{entry.get<double>()}
                                       : cfg::number_array(entry, "lambda_list entry");
      lambdas.push_back(Multipliers{std::move(lambda)});
    }
    const MonotonicityReport report = monotonicity_scan(problem, lambdas, component, solver, tol);
    result["component"] = component;
    result["pairs_checked"] = report.pairs_checked;
    result["violations"] = json::array();
    for (const MonotonicityViolation& v : report.violations) {
      result["violations"].push_back({{"lambda_hi", v.lambda_hi.lambda},
                                      {"lambda_lo", v.lambda_lo.lambda},
                                      {"c_hi", v.c_hi},
                                      {"c_lo", v.c_lo},
                                      {"provenance", to_string(v.provenance)}});
    }
    std::vector<std::pair<double, double>> curve;
    for (const MonotonicityObservation& obs : report.observations) {
      curve.emplace_back(obs.lambda[component], obs.c);
    }
    writer.add("curve-violation-vs-lambda.dat", curve_dat(curve));
    writer.add_work("pr_solves", static_cast<long long>(lambdas.size()));
    if (solver.kind == SolverChoice::Kind::grid) {
      writer.add_work("grid_evaluations",
                      grid_size(problem, solver.grid) * static_cast<long long>(lambdas.size()));
    }
  } else if (command == "sensitivity") {
    detail::require_grid_solver(solver, command);
    const std::vector<double> thetas = cfg::number_array(config["theta_list"], "theta_list");
    const cfg::LambdaGridRange range = cfg::lambda_grid_range(config);
    const SensitivityCurve curve =
        sensitivity_curve(problem, thetas, range.lo, range.hi, range.count, solver.grid);
    result["rows"] = json::array();
    std::vector<std::pair<double, double>> found;
    for (const SensitivityRow& row : curve.rows) {
      json jr;
      jr["theta"] = row.theta;
      jr["lambda"] = row.lambda ? json(*row.lambda) : json(nullptr);
      result["rows"].push_back(std::move(jr));
      if (row.lambda) found.emplace_back(row.theta, *row.lambda);
    }
    writer.add("curve-sensitivity.dat", curve_dat(found));
    writer.add("curve-violation-vs-lambda.dat", curve_dat(curve.samples));
    writer.add_work("pr_solves", static_cast<long long>(curve.samples.size()));
    writer.add_work("grid_evaluations", grid_size(problem, solver.grid) *
                                            static_cast<long long>(curve.samples.size()));
  } else {
    throw ConfigError("config: unknown command '" + command + "'");
  }

  writer.add_json("result.json", result);
  return writer.finalize(exit_code);
}

// ---------------------------------------------------------------------------
// Demos

namespace detail {

struct DemoCheck {
  std::string expected;
  bool observed = false;
  std::string evidence;
};

inline std::string demo_summary(const std::string& name, const std::vector<DemoCheck>& checks) {
  std::string out = "demo " + name + "\n";
  out += std::string(5 + name.size(), '=') + "\n\n";
  bool all = true;
  for (const DemoCheck& check : checks) {
    out += "expected: " + check.expected + "\n";
    out += "observed: " + std::string(check.observed ? "YES" : "NO") + " -- " + check.evidence +
           "\n\n";
    all = all && check.observed;
  }
  out += "signature " + std::string(all ? "OBSERVED" : "NOT OBSERVED") + "\n";
  return out;
}

}  // namespace detail

/// Pre-wired runs reproducing the library's canonical pathologies. Each demo
/// writes the usual artifact files plus summary.txt stating the expected
/// signature and whether this run observed it.
inline RunArtifact demo(const std::string& name, const std::filesystem::path& out_dir,
                        std::uint64_t seed, int threads) {
  json echo;
  echo["command"] = "demo";
  echo["name"] = name;
  echo["output_dir"] = out_dir.string();
  echo["seed"] = seed;
  ArtifactWriter writer(out_dir, echo, seed);
  std::vector<detail::DemoCheck> checks;
  json result;
  result["demo"] = name;

  GridSpec grid;
  grid.points_per_dim = 2001;
  grid.threads = threads;  // 0 = machine parallelism; results are identical either way
  SolverChoice grid_solver;
  grid_solver.grid = grid;

  if (name == "fig1a") {
    // Convex plateau: at lambda = 1 every w in [0,1] is optimal; below/above,
    // the optimum jumps between the endpoints.
    const Problem plateau = make_plateau();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::vector<std::pair<double, double>> profile;
    const Multipliers one{{1.0}};
    for (int i = 0; i <= 2000; ++i) {
      const double w = (static_cast<double>(i) * 1.0) / 2000.0;
      const double reg = eval_regularized(plateau, Assignment{{w}}, one);
      profile.emplace_back(w, reg);
      lo = std::min(lo, reg);
      hi = std::max(hi, reg);
    }
    writer.add("curve-objective-at-tie.dat", curve_dat(profile));
    checks.push_back({"regularized objective constant on [0,1] at lambda=1 (max-min <= 1e-9)",
                      hi - lo <= 1e-9, "max-min = " + fmt17(hi - lo)});

    const SolveResult below = solve_pr_grid(plateau, Multipliers{{0.99}}, grid);
    const SolveResult above = solve_pr_grid(plateau, Multipliers{{1.01}}, grid);
    checks.push_back({"optimum jumps across lambda=1: w*(0.99)=0 with C=1, w*(1.01)=1 with C=0",
                      below.w[0] == 0.0 && above.w[0] == 1.0,
                      "w*(0.99) = " + fmt17(below.w[0]) + ", w*(1.01) = " + fmt17(above.w[0])});

    const Pr4pcOutcome sweep =
        pr4pc(plateau, Threshold{{0.0}}, LambdaStrategy::logarithmic(0.25, 4.0, 9), grid_solver);
    checks.push_back({"multiplier sweep with theta=0 recovers the C=0 endpoint (loss 1)",
                      sweep.winner && std::abs(sweep.winner_entry().result.loss - 1.0) <= 1e-9,
                      sweep.winner ? "winner loss = " + fmt17(sweep.winner_entry().result.loss)
                                   : "no winner"});
    writer.add("trace.csv", trace_csv(plateau, sweep));
    result["max_minus_min_at_tie"] = hi - lo;
    result["optimum_below_tie"] = to_json(below);
    result["optimum_above_tie"] = to_json(above);
    result["sweep"] = to_json(sweep);
    writer.add_work("grid_evaluations", grid_size(plateau, grid) * 11 + 2001);
  } else if (name == "fig1b") {
    // Non-convex twin optima: same regularized value at lambda = 1, opposite
    // trade-offs; the achieved violation jumps 1 -> 0 across the tie.
    const Problem tie = make_two_point_tie();
    const Assignment a{{0.0}}, b{{1.0}};
    const Multipliers one{{1.0}};
    const double reg_a = eval_regularized(tie, a, one);
    const double reg_b = eval_regularized(tie, b, one);
    checks.push_back({"both points score the same regularized value at lambda=1",
                      reg_a == reg_b,
                      "reg(a) = " + fmt17(reg_a) + ", reg(b) = " + fmt17(reg_b)});
    const Pr4pcOutcome sweep =
        pr4pc(tie, Threshold{{1.0}}, LambdaStrategy::logarithmic(0.25, 4.0, 9), grid_solver);
    bool jump = false;
    for (const Pr4pcEntry& entry : sweep.trace) {
      if (entry.lambda[0] < 1.0 && entry.result.violation[0] == 1.0) jump = true;
    }
    bool settles = false;
    for (const Pr4pcEntry& entry : sweep.trace) {
      if (entry.lambda[0] >= 1.0 && entry.result.violation[0] == 0.0) settles = true;
    }
    checks.push_back({"achieved violation jumps 1 -> 0 across lambda=1 (no intermediate value)",
                      jump && settles, "see trace.csv"});
    writer.add("trace.csv", trace_csv(tie, sweep));
    result["reg_a"] = reg_a;
    result["reg_b"] = reg_b;
    result["sweep"] = to_json(sweep);
    writer.add_work("pr_solves", static_cast<long long>(sweep.trace.size()));
  } else if (name == "fig2a") {
    // Unattainable constrained optimum, twice over: the documented table's
    // crossed multiplier bounds, and the truncated unbounded instance where
    // no swept multiplier ever meets the threshold.
    const Problem table = unattainable_finite_table();
    const Assignment w_star{{0.0}};
    const AttainabilityHalfspaces hs = attainability_halfspaces(table, w_star, grid);
    const MultiplierInterval interval = multiplier_interval(hs.halfspaces, 0);
    checks.push_back({"multiplier interval for the table's w* is empty (lower 1 > upper 0.4)",
                      !interval.feasible && interval.lower > interval.upper,
                      "interval = [" + fmt17(interval.lower) + ", " + fmt17(interval.upper) + "]"});

    const Pr4pcOutcome table_sweep = pr4pc(table, Threshold{{1.0}},
                                           LambdaStrategy::logarithmic(1e-3, 1e3, 200), grid_solver);
    bool stored_w_star = false;
    for (std::size_t idx : table_sweep.stored) {
      if (table_sweep.trace[idx].result.w == w_star) stored_w_star = true;
    }
    checks.push_back({"no swept multiplier ever stores the table's w*", !stored_w_star,
                      std::to_string(table_sweep.stored.size()) + " stored entries, none equal w*"});

    const Problem unbounded = make_log_unbounded(1e3);
    const Pr4pcOutcome sweep = pr4pc(unbounded, Threshold{{1.0}},
                                     LambdaStrategy::logarithmic(1e-3, 100.0, 200), grid_solver);
    checks.push_back({"pr4pc stored set empty on log_unbounded (w_max=1e3, theta=1)",
                      sweep.stored.empty() && sweep.no_multiplier_found(),
                      std::to_string(sweep.stored.size()) + " stored entries over " +
                          std::to_string(sweep.trace.size()) + " candidates"});
    const std::optional<SolveResult> pc = solve_pc_grid(unbounded, Threshold{{1.0}}, grid);
    checks.push_back({"yet PC(theta=1) has a finite optimum near w = e-1",
                      pc && std::abs(pc->w[0] - (std::exp(1.0) - 1.0)) <= 1.0,
                      pc ? "PC optimum w = " + fmt17(pc->w[0]) : "infeasible"});
    writer.add("trace.csv", trace_csv(unbounded, sweep));
    result["interval"] = to_json(interval);
    result["table_sweep"] = to_json(table_sweep);
    result["unbounded_sweep_stored"] = sweep.stored.size();
    if (pc) result["pc_optimum"] = to_json(*pc);
    writer.add_work("grid_evaluations", grid_size(unbounded, grid) * 201);
  } else if (name == "fig2b") {
    // Numerical issues: driving the violation below theta needs lambda ~ 1/theta.
    const Problem vanishing = make_vanishing_gradient();
    GridSpec fine = grid;
    fine.points_per_dim = 100001;
    const std::vector<double> thetas = {1e-1, 1e-2, 1e-3};
    const SensitivityCurve curve = sensitivity_curve(vanishing, thetas, 1e-2, 1e4, 121, fine);
    bool scaling = true;
    std::string evidence;
    const double step = std::pow(1e6, 1.0 / 120.0);  // one log-grid step
    for (const SensitivityRow& row : curve.rows) {
      if (!row.lambda) {
        scaling = false;
        evidence += "theta=" + fmt17(row.theta) + ": not found; ";
        continue;
      }
      const double ideal = 1.0 / row.theta;
      if (!(*row.lambda <= ideal * step * (1.0 + 1e-9) &&
            *row.lambda >= ideal / step * (1.0 - 1e-9))) {
        scaling = false;
      }
      evidence += "theta=" + fmt17(row.theta) + ": lambda=" + fmt17(*row.lambda) + "; ";
    }
    checks.push_back({"smallest workable multiplier scales like 1/theta (within one log step)",
                      scaling, evidence});
    checks.push_back({"multiplier growth unbounded as theta -> 0",
                      scaling, "lambda multiplies ~10x per decade of theta"});
    std::vector<std::pair<double, double>> found;
    for (const SensitivityRow& row : curve.rows) {
      if (row.lambda) found.emplace_back(row.theta, *row.lambda);
    }
    writer.add("curve-sensitivity.dat", curve_dat(found));
    writer.add("curve-violation-vs-lambda.dat", curve_dat(curve.samples));
    result["rows"] = json::array();
    for (const SensitivityRow& row : curve.rows) {
      result["rows"].push_back(
          {{"theta", row.theta}, {"lambda", row.lambda ? json(*row.lambda) : json(nullptr)}});
    }
    writer.add_work("grid_evaluations",
                    grid_size(vanishing, fine) * static_cast<long long>(curve.samples.size()));
  } else if (name == "relax_pitfall") {
    // Relaxed balance constraint "satisfied" by maximally uncertain outputs.
    const Problem clf = make_balanced_classification();
    GridSpec g = grid;
    g.points_per_dim = 1601;
    SolverChoice s;
    s.grid = g;
    const Pr4pcOutcome sweep =
        pr4pc(clf, Threshold{{0.0}}, LambdaStrategy::logarithmic(1e-2, 1e2, 9), s);
    json outputs_json = json::array();
    if (sweep.winner) {
      const SolveResult& win = sweep.winner_entry().result;
      const std::vector<double> outputs = clf.model_outputs(win.w);
      bool uncertain = true;
      for (double y : outputs) uncertain = uncertain && y >= 0.45 && y <= 0.55;
      const double penalty = win.violation[0];
      const double accuracy = detail::accuracy_against_targets(outputs, clf.dataset->targets);
      checks.push_back({"balance penalty <= 1e-6 at the sweep winner", penalty <= 1e-6,
                        "penalty = " + fmt17(penalty)});
      checks.push_back({"all model outputs in [0.45, 0.55]: uncertain, not balanced", uncertain,
                        "outputs at w = " + fmt17(win.w[0])});
      checks.push_back({"classification accuracy is chance-level",
                        std::abs(accuracy - 0.5) <= 0.11,
                        "accuracy = " + fmt17(accuracy)});
      std::vector<std::pair<double, double>> out_curve;
      for (std::size_t i = 0; i < outputs.size(); ++i) {
        out_curve.emplace_back(static_cast<double>(i), outputs[i]);
        outputs_json.push_back(outputs[i]);
      }
      writer.add("curve-outputs.dat", curve_dat(out_curve));
      result["winner"] = to_json(win);
      result["outputs"] = outputs_json;
      result["balance_penalty"] = penalty;
      result["accuracy"] = accuracy;
    } else {
      checks.push_back({"sweep finds a multiplier meeting theta=0", false, "no winner"});
    }
    writer.add("trace.csv", trace_csv(clf, sweep));
    result["sweep"] = to_json(sweep);
    writer.add_work("grid_evaluations",
                    grid_size(clf, g) * static_cast<long long>(sweep.trace.size()));
  } else {
    throw ConfigError("demo: unknown name '" + name + "' (expected fig1a, fig1b, fig2a, "
                      "fig2b, relax_pitfall)");
  }

  bool all_observed = true;
  json checks_json = json::array();
  for (const detail::DemoCheck& check : checks) {
    all_observed = all_observed && check.observed;
    checks_json.push_back(
        {{"expected", check.expected}, {"observed", check.observed}, {"evidence", check.evidence}});
  }
  result["checks"] = std::move(checks_json);
  result["signature_observed"] = all_observed;
  writer.add("summary.txt", detail::demo_summary(name, checks));
  writer.add_json("result.json", result);
  return writer.finalize(0);
}

}  // namespace prpc
