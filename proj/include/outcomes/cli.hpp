#pragma once

// Command-line front end. Every successful command prints one JSON RunReport:
//
//   {"command": ..., "version": ..., "inputs_digest": ..., "solver": {...},
//    "result": {..., "tol": ...}, "warnings": [...]}
//
// Exit codes: 0 success, 2 invalid input, 3 solver failure, 64 usage error.
// Needs CLI11 on the include path (target outcomes::cli).

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "outcomes/advantage.hpp"
#include "outcomes/catalog.hpp"
#include "outcomes/discrimination.hpp"
#include "outcomes/errors.hpp"
#include "outcomes/generalized.hpp"
#include "outcomes/io.hpp"
#include "outcomes/robustness.hpp"

#ifndef OUTCOMES_VERSION
#define OUTCOMES_VERSION "0.0.0"
#endif

namespace outcomes::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 1;

namespace detail {

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  double tol = 1e-8;
  bool stdin_used = false;
  json inputs = json::object();  // everything the result depends on, hashed into the digest
  json solver = json::object();
  std::vector<std::string> warnings;

  /// Reads a JSON document from a path, or from stdin when the path is "-". A catalog
  /// RunReport is unwrapped to the instance it carries.
  json load(const std::string& key, const std::string& path) {
    std::string text;
    if (path == "-") {
      if (stdin_used) throw DomainError("only one input can come from stdin");
      stdin_used = true;
      text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else {
      std::ifstream f(path, std::ios::binary);
      if (!f) throw DomainError("cannot open " + path);
      text.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    json j = io::parse(text, path == "-" ? "<stdin>" : path);
    if (j.is_object() && j.value("command", "") == "catalog" && j.contains("result") && j["result"].contains("instance"))
      j = j["result"]["instance"];
    inputs[key] = j;
    return j;
  }

  void write_file(const std::string& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot write " + path);
    f << j.dump(2) << '\n';
  }
};

inline void check_n(int n) {
  if (n < 1) throw DomainError("--n must be at least 1");
}

inline json rational(const Rational& r) { return {{"num", r.num}, {"den", r.den}, {"value", r.value()}}; }

inline json combination(const RelabelingScheme& s, int x) { return json(s[x]); }

inline json robustness_cmd(Context& ctx, const std::string& povm_path, int n, const std::string& dual_dump) {
  const auto povm = io::povm_from_json(ctx.load("povm", povm_path));
  check_n(n);
  ctx.inputs["n"] = n;
  RobustnessOptions opt;
  opt.solver_tol = ctx.tol;
  const auto r = robustness(povm, n, opt);
  ctx.solver["primal_iterations"] = r.primal_iterations;
  ctx.solver["dual_iterations"] = r.dual_iterations;
  ctx.warnings.insert(ctx.warnings.end(), r.warnings.begin(), r.warnings.end());

  json res;
  res["m"] = r.m;
  res["n"] = r.n;
  res["d"] = r.d;
  res["robustness"] = r.robustness;
  res["primal_value"] = r.primal_value;
  res["dual_value"] = r.dual_value;
  res["gap"] = r.gap;
  res["bound"] = rational(max_advantage_bound(r.m, r.n));
  res["tol"] = ctx.tol;
  json combos = json::array();
  for (int x = 0; x < r.scheme.size(); ++x) combos.push_back(combination(r.scheme, x));
  res["combinations"] = combos;
  res["weights"] = r.weights;
  json subs = json::array();
  for (const auto& s : r.sub_povms) subs.push_back(s ? io::to_json(*s) : json(nullptr));
  res["sub_povms"] = subs;
  res["noise_effects"] = io::to_json(r.noise_effects);
  if (r.extracted_ensemble) {
    res["witness_ensemble"] = io::to_json(*r.extracted_ensemble);
    res["witness_advantage_ratio"] = advantage(*r.extracted_ensemble, povm, n, ctx.tol).advantage_ratio;
  } else {
    res["witness_ensemble"] = nullptr;
    res["witness_advantage_ratio"] = nullptr;
  }
  if (!dual_dump.empty()) {
    json dump;
    dump["witness_effects"] = io::to_json(r.witness_effects);
    dump["free_duals"] = io::to_json(r.free_duals);
    dump["standard_form"] = build_robustness_dual(povm, n).standard_form_json();
    ctx.write_file(dual_dump, dump);
  }
  return res;
}

inline json discriminate_cmd(Context& ctx, const std::string& ens_path, const std::string& povm_path, int n) {
  const auto e = io::ensemble_from_json(ctx.load("ensemble", ens_path));
  const auto m = io::povm_from_json(ctx.load("povm", povm_path));
  check_n(n);
  ctx.inputs["n"] = n;
  if (e.size() != m.outcomes()) throw DomainError("ensemble size must equal the number of outcomes");
  if (e.dim() != m.dim()) throw DomainError("ensemble and measurement dimensions differ");
  const auto rep = advantage(e, m, n, ctx.tol);
  const auto best = optimal_guess(e, e.size(), ctx.tol);
  ctx.solver["optimal_guess_iterations"] = best.iterations;
  json res;
  res["p_guess"] = rep.p_guess;
  res["optimal_free"] = rep.optimal_free;
  res["advantage_ratio"] = rep.advantage_ratio;
  res["best_combination"] = combination(RelabelingScheme::enumerate(e.size(), n), rep.best_combination);
  res["optimal_guess"] = best.value;
  res["bound"] = rational(max_advantage_bound(e.size(), n));
  res["tol"] = ctx.tol;
  return res;
}

inline json seesaw_cmd(Context& ctx, int d, int m, int n, const SeesawOptions& opt, const std::string& csv) {
  ctx.inputs["d"] = d;
  ctx.inputs["m"] = m;
  ctx.inputs["n"] = n;
  ctx.inputs["restarts"] = opt.restarts;
  ctx.inputs["seed"] = opt.seed;
  ctx.inputs["max_iter"] = opt.max_iter;
  if (opt.restarts < 0 || opt.max_iter < 1 || opt.jobs < 1) throw DomainError("--restarts >= 0, --max-iter >= 1, --jobs >= 1 required");
  const auto t = seesaw(d, m, n, opt);
  ctx.warnings.insert(ctx.warnings.end(), t.warnings.begin(), t.warnings.end());
  ctx.solver["restarts_used"] = t.restarts_used;
  json res;
  res["d"] = t.d;
  res["m"] = t.m;
  res["n"] = t.n;
  res["final_ratio"] = t.final_ratio;
  res["bound"] = rational(t.bound);
  res["converged"] = t.converged;
  res["best_restart"] = t.best_restart;
  res["saturation_guaranteed"] = t.saturation_guaranteed;
  res["rng"] = catalog::kRngName;
  res["seed"] = opt.seed;
  res["tol"] = t.tol;
  res["solver_tol"] = opt.solver_tol;
  json its = json::array();
  for (const auto& s : t.iterations)
    its.push_back({{"ratio", s.ratio}, {"ensemble", io::to_json(s.ensemble)}, {"povm", io::to_json(s.povm)}});
  res["iterations"] = its;
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw DomainError("cannot write " + csv);
    f << "iteration,ratio\n";
    f.precision(17);
    for (std::size_t i = 0; i < t.iterations.size(); ++i) f << i << ',' << t.iterations[i].ratio << '\n';
  }
  return res;
}

inline json certify_cmd(Context& ctx, const std::string& ens_path, double observed, double stat_tol) {
  const auto e = io::ensemble_from_json(ctx.load("ensemble", ens_path));
  ctx.inputs["observed"] = observed;
  ctx.inputs["stat_tol"] = stat_tol;
  if (stat_tol < 0.0) throw DomainError("--stat-tol must be non-negative");
  const auto c = certify_outcomes(e, observed, stat_tol, ctx.tol);
  if (!c.consistent)
    ctx.warnings.push_back("observed value exceeds every simulable threshold (including k = |E|)");
  json res;
  res["certified_min_outcomes"] = c.certified_min_outcomes;
  res["observed"] = observed;
  json table = json::array();
  for (std::size_t k = 0; k < c.thresholds.size(); ++k)
    table.push_back({{"k", k + 1}, {"max_simulable_p_guess", c.thresholds[k]}, {"excluded", observed > c.thresholds[k] + stat_tol}});
  res["thresholds"] = table;
  res["consistent"] = c.consistent;
  res["stat_tol"] = stat_tol;
  res["tol"] = ctx.tol;
  return res;
}

inline json effective_cmd(Context& ctx, const std::string& povm_path, double threshold) {
  const auto p = io::povm_from_json(ctx.load("povm", povm_path));
  ctx.inputs["threshold"] = threshold;
  RobustnessOptions opt;
  opt.solver_tol = ctx.tol;
  opt.simulability_threshold = threshold;
  const auto eo = effective_outcomes(p, opt);
  json res;
  res["effective_outcomes"] = eo.number;
  res["robustness_by_k"] = eo.robustness_by_k;
  res["nonzero_effects"] = effective_outcome_count(p);
  res["threshold"] = threshold;
  res["tol"] = ctx.tol;
  return res;
}

inline json score_cmd(Context& ctx, const std::string& coeffs, const std::string& preps, const std::string& assemblage,
                      const std::vector<std::string>& free_paths) {
  const auto c = io::coefficients_from_json(ctx.load("coeffs", coeffs));
  const auto a = io::assemblage_from_json(ctx.load("assemblage", assemblage));
  std::optional<Ensemble> e;
  if (!preps.empty()) e = io::ensemble_from_json(ctx.load("preps", preps));
  json res;
  const auto bij = check_bijective(c);
  res["bijective"] = bij.bijective;
  res["rank"] = bij.rank;
  res["f_image"] = io::to_json(apply_f(c, a));
  if (e) {
    res["score"] = score(c, *e, a);
    res["pairing"] = pairing(*e, apply_f(c, a));
  }
  if (!free_paths.empty()) {
    std::vector<MeasurementAssemblage> free;
    for (std::size_t k = 0; k < free_paths.size(); ++k)
      free.push_back(io::assemblage_from_json(ctx.load("free" + std::to_string(k), free_paths[k])));
    const auto g = generalized_advantage(c, a, free, e, ctx.tol);
    ctx.warnings.insert(ctx.warnings.end(), g.warnings.begin(), g.warnings.end());
    json adv;
    adv["ratio"] = g.degenerate ? json(nullptr) : json(g.ratio);
    adv["resource_score"] = g.resource_score;
    adv["best_free_score"] = g.best_free_score;
    adv["best_free_index"] = g.best_free_index;
    adv["separation"] = g.separation;
    adv["ensemble"] = io::to_json(*g.ensemble);
    if (g.witness) adv["witness_shift"] = g.witness->shift;
    res["advantage"] = adv;
  }
  res["tol"] = ctx.tol;
  return res;
}

inline json catalog_cmd(Context& ctx, const std::string& kind, int d, int m, std::uint64_t seed, bool dirichlet,
                        const std::string& out_path) {
  catalog::InstanceSpec spec;
  spec.kind = catalog::parse_kind(kind);
  spec.d = d;
  spec.m = m;
  spec.seed = seed;
  spec.dirichlet = dirichlet;
  ctx.inputs["kind"] = kind;
  ctx.inputs["d"] = d;
  ctx.inputs["m"] = m;
  ctx.inputs["seed"] = seed;
  ctx.inputs["dirichlet"] = dirichlet;
  if (d < 1) throw DomainError("--d must be at least 1");
  const auto inst = catalog::make(spec);
  json j = std::visit([](const auto& v) { return io::to_json(v); }, inst);
  if (!out_path.empty()) ctx.write_file(out_path, j);
  json res;
  res["kind"] = kind;
  res["type"] = std::holds_alternative<Povm>(inst) ? "povm" : "ensemble";
  res["rng"] = catalog::kRngName;
  res["instance"] = j;
  res["tol"] = kSumTol;
  return res;
}

} // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Measurement outcome robustness and state-discrimination advantage", "outcomes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", OUTCOMES_VERSION);
  double tol = 1e-8;
  app.add_option("--tol", tol, "Solver accuracy; also used for decision thresholds")->capture_default_str()->check(CLI::PositiveNumber);

  std::string povm, ensemble, dual_dump, coeffs, preps, assemblage, kind, csv, out_path;
  std::vector<std::string> free_paths;
  int n = 2, d = 2, m = -1;
  double observed = 0.0, stat_tol = 0.0, threshold = 1e-7;
  bool dirichlet = false;
  SeesawOptions sopt;

  auto* rob = app.add_subcommand("robustness", "Robustness of a POVM against n-outcome-simulable measurements");
  rob->add_option("--povm", povm, "POVM JSON file, - for stdin")->required();
  rob->add_option("--n", n, "Simulating outcome count")->required();
  rob->add_option("--dual-dump", dual_dump, "Write dual witness and standard form to this file");

  auto* dis = app.add_subcommand("discriminate", "Guessing probability against the best n-outcome-simulable one");
  dis->add_option("--ensemble", ensemble, "Ensemble JSON file")->required();
  dis->add_option("--povm", povm, "POVM JSON file")->required();
  dis->add_option("--n", n, "Simulating outcome count")->required();

  auto* see = app.add_subcommand("seesaw", "Alternating search for a maximal advantage");
  see->add_option("--d", d, "Dimension")->required();
  see->add_option("--m", m, "Outcome count of the searched measurement")->required();
  see->add_option("--n", n, "Simulating outcome count")->required();
  see->add_option("--restarts", sopt.restarts, "Random restarts")->capture_default_str();
  see->add_option("--seed", sopt.seed, "Base seed")->capture_default_str();
  see->add_option("--max-iter", sopt.max_iter, "Iterations per restart")->capture_default_str();
  see->add_option("--jobs", sopt.jobs, "Restarts run concurrently")->capture_default_str();
  see->add_option("--csv", csv, "Write the best trace as CSV");

  auto* cer = app.add_subcommand("certify", "Minimum outcome count implied by an observed guessing probability");
  cer->add_option("--ensemble", ensemble, "Ensemble JSON file")->required();
  cer->add_option("--observed", observed, "Observed guessing probability")->required();
  cer->add_option("--stat-tol", stat_tol, "Statistical margin subtracted from the observation")->capture_default_str();

  auto* eff = app.add_subcommand("effective-outcomes", "Smallest n for which the POVM is n-outcome simulable");
  eff->add_option("--povm", povm, "POVM JSON file")->required();
  eff->add_option("--threshold", threshold, "Robustness treated as zero")->capture_default_str();

  auto* sco = app.add_subcommand("score", "Linear prepare-and-measure score");
  sco->add_option("--coeffs", coeffs, "ScoreCoefficients JSON file")->required();
  sco->add_option("--preps", preps, "Preparations as an ensemble (priors folded in)");
  sco->add_option("--assemblage", assemblage, "Measurement assemblage JSON file")->required();
  sco->add_option("--free", free_paths, "Free assemblages to compare against (repeatable)");

  auto* cat = app.add_subcommand("catalog", "Emit a canonical or seeded random instance");
  cat->add_option("--kind", kind, "projective-basis | trine | sic-qubit | uniform-orthogonal-ensemble | random-povm | random-ensemble")->required();
  cat->add_option("--d", d, "Dimension")->capture_default_str();
  cat->add_option("--m", m, "Outcome / state count");
  cat->add_option("--seed", sopt.seed, "Seed for random kinds")->capture_default_str();
  cat->add_flag("--dirichlet", dirichlet, "Flat-Dirichlet priors for random-ensemble");
  cat->add_option("--out", out_path, "Also write the bare instance to this file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << OUTCOMES_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ConversionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  detail::Context ctx{in, out, err};
  ctx.tol = tol;
  const std::string command = app.get_subcommands().front()->get_name();
  json result;
  try {
    if (command == "robustness") result = detail::robustness_cmd(ctx, povm, n, dual_dump);
    else if (command == "discriminate") result = detail::discriminate_cmd(ctx, ensemble, povm, n);
    else if (command == "seesaw") {
      sopt.solver_tol = tol;
      result = detail::seesaw_cmd(ctx, d, m, n, sopt, csv);
    } else if (command == "certify") result = detail::certify_cmd(ctx, ensemble, observed, stat_tol);
    else if (command == "effective-outcomes") result = detail::effective_cmd(ctx, povm, threshold);
    else if (command == "score") result = detail::score_cmd(ctx, coeffs, preps, assemblage, free_paths);
    else result = detail::catalog_cmd(ctx, kind, d, m, sopt.seed, dirichlet, out_path);
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    if (!e.diagnostics().empty()) err << e.diagnostics() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInput;
  } catch (const json::exception& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }

  json report;
  report["command"] = command;
  report["version"] = OUTCOMES_VERSION;
  ctx.inputs["command"] = command;
  ctx.inputs["tol"] = tol;
  report["inputs_digest"] = io::fnv1a_hex(ctx.inputs.dump());
  ctx.solver["backend"] = conic::default_backend().name();
  ctx.solver["tol"] = tol;
  report["solver"] = ctx.solver;
  report["result"] = result;
  report["warnings"] = ctx.warnings;
  out << report.dump(2) << '\n';
  return kExitOk;
}

} // namespace outcomes::cli
