// Command-line front end: solve / check / oracle / examples over JSON
// instance files. Exit codes: 0 success, 2 validation failure, 3 numerical
// failure, 4 enumeration cap exceeded.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "drmdp/fixtures.hpp"
#include "drmdp/io.hpp"
#include "drmdp/risk_soc.hpp"
#include "drmdp/robust_dp.hpp"
#include "drmdp/static_oracle.hpp"

namespace {

using drmdp::InstanceFile;
using nlohmann::json;

json values_to_json(const drmdp::MdpInstance& inst, const drmdp::ValueTable& table) {
  json out = json::array();
  for (int t = 0; t <= inst.horizon; ++t) {
    json row = json::object();
    for (int s = 0; s < inst.num_states(t); ++s) row[inst.states[t][s]] = table.values[t][s];
    out.push_back(std::move(row));
  }
  return out;
}

json policy_to_json(const drmdp::MdpInstance& inst, const drmdp::RandomizedPolicy& policy) {
  json out = json::array();
  for (int t = 0; t < inst.horizon; ++t) {
    json row = json::object();
    for (int s = 0; s < inst.num_states(t); ++s) {
      json per_a = json::object();
      for (int a = 0; a < inst.num_actions(t, s); ++a)
        per_a[inst.actions[t][s][a]] = policy.rows[t][s][a];
      row[inst.states[t][s]] = std::move(per_a);
    }
    out.push_back(std::move(row));
  }
  return out;
}

void print_values_table(const drmdp::MdpInstance& inst, const drmdp::ValueTable& table,
                        const std::string& label) {
  std::printf("%s:\n", label.c_str());
  for (int t = 0; t <= inst.horizon; ++t)
    for (int s = 0; s < inst.num_states(t); ++s)
      std::printf("  t=%d  %-10s %.12g\n", t + 1, inst.states[t][s].c_str(), table.values[t][s]);
}

// Resolves the model the file asks to solve: explicit ambiguity, the set
// induced by a risk specification, or the singleton around a fixed kernel.
drmdp::AmbiguityModel effective_model(const InstanceFile& file) {
  if (file.ambiguity) return *file.ambiguity;
  if (file.avar) return drmdp::build_avar_ambiguity(*file.avar, file.mdp);
  if (file.kernel) return drmdp::singleton_ambiguity(*file.kernel);
  throw drmdp::ValidationError(
      "file gives neither an ambiguity model, an avar spec, nor a fixed kernel");
}

int cmd_solve(const std::string& path, bool primal_only, bool dual_only, const std::string& format) {
  InstanceFile file = drmdp::load_instance_file(path);

  if (file.cost_ambiguity) {
    if (!file.kernel) throw drmdp::ValidationError("cost ambiguity requires a fixed kernel");
    drmdp::CostRobustSolution p = drmdp::solve_primal_cost(file.mdp, *file.kernel, *file.cost_ambiguity);
    drmdp::CostRobustSolution d = drmdp::solve_dual_cost(file.mdp, *file.kernel, *file.cost_ambiguity);
    drmdp::ValueTable reg = drmdp::solve_via_regularization(file.mdp, *file.kernel, *file.cost_ambiguity);
    const double gap = p.values.at_initial(file.mdp) - d.values.at_initial(file.mdp);
    if (format == "json") {
      json out;
      out["mode"] = "cost_robust";
      if (!dual_only) {
        out["primal_values"] = values_to_json(file.mdp, p.values);
        out["controller_policy"] = policy_to_json(file.mdp, p.policy);
      }
      if (!primal_only) out["dual_values"] = values_to_json(file.mdp, d.values);
      out["gap"] = gap;
      out["regularized_value"] = reg.at_initial(file.mdp);
      std::printf("%s\n", out.dump(2).c_str());
    } else {
      if (!dual_only) print_values_table(file.mdp, p.values, "primal values (cost-robust)");
      if (!primal_only) print_values_table(file.mdp, d.values, "dual values (cost-robust)");
      std::printf("gap: %.12g\nregularized value: %.12g\n", gap, reg.at_initial(file.mdp));
    }
    return 0;
  }

  drmdp::AmbiguityModel model = effective_model(file);
  drmdp::RobustSolveReport rep = drmdp::diagnose(file.mdp, model);
  if (format == "json") {
    json out;
    out["mode"] = "distributionally_robust";
    if (!dual_only) {
      out["primal_values"] = values_to_json(file.mdp, rep.primal_values);
      out["controller_policy"] = policy_to_json(file.mdp, rep.controller_policy);
    }
    if (!primal_only) out["dual_values"] = values_to_json(file.mdp, rep.dual_values);
    out["gap"] = rep.gap;
    out["shared_worst_kernel"] = drmdp::verdict_name(rep.assumption.verdict);
    out["convex_marginal_all"] = rep.convex_marginal_all;
    out["deterministic_policy_exists"] = rep.det_policy_exists;
    json saddle = json::array();
    for (int t = 0; t < file.mdp.horizon; ++t) {
      json row = json::object();
      for (int s = 0; s < file.mdp.num_states(t); ++s)
        row[file.mdp.states[t][s]] = static_cast<bool>(rep.per_state_saddle[t][s]);
      saddle.push_back(std::move(row));
    }
    out["per_state_saddle"] = std::move(saddle);
    std::printf("%s\n", out.dump(2).c_str());
  } else {
    if (!dual_only) {
      print_values_table(file.mdp, rep.primal_values, "primal values V");
      std::printf("controller policy:\n%s\n", policy_to_json(file.mdp, rep.controller_policy).dump(2).c_str());
    }
    if (!primal_only) print_values_table(file.mdp, rep.dual_values, "dual values Q");
    std::printf("gap: %.12g\n", rep.gap);
    std::printf("shared worst kernel: %s\n", drmdp::verdict_name(rep.assumption.verdict));
    std::printf("convex marginals: %s\n", rep.convex_marginal_all ? "true" : "false");
    std::printf("deterministic optimal policy: %s\n", rep.det_policy_exists ? "exists" : "none");
    std::printf("note: %s\n", rep.remark.c_str());
  }
  return 0;
}

// Verdicts and witnesses only; no value tables or policies are reported. The
// shared-worst-kernel condition is defined against the continuation values,
// so the backward pass feeding it runs internally.
int cmd_check(const std::string& path) {
  InstanceFile file = drmdp::load_instance_file(path);
  if (file.soc) {
    drmdp::SocProbeReport probe = drmdp::soc_rectangularity_probe(*file.soc);
    std::printf("noise-induced set: %s\n", probe.note.c_str());
    if (probe.not_s_rectangular)
      std::printf("  witness membership distance: %.3e\n", probe.product.witness_distance);
  }
  drmdp::AmbiguityModel model = effective_model(file);
  drmdp::RobustSolution primal = drmdp::solve_primal(file.mdp, model);
  drmdp::AssumptionSummary assumption =
      drmdp::check_shared_worst_kernel_all(file.mdp, model, primal.values);
  std::printf("shared worst kernel: %s\n", drmdp::verdict_name(assumption.verdict));
  for (int t = 0; t < file.mdp.horizon; ++t) {
    const auto& stage = assumption.stages[t];
    std::printf("  stage %d [%s]: %s%s%s\n", t + 1, drmdp::model_tag(model.stages[t]),
                drmdp::verdict_name(stage.verdict), stage.note.empty() ? "" : " - ",
                stage.note.c_str());
    if (stage.witness) {
      for (int s = 0; s < file.mdp.num_states(t); ++s)
        for (int a = 0; a < file.mdp.num_actions(t, s); ++a) {
          std::printf("    P*(.|%s,%s) =", file.mdp.states[t][s].c_str(),
                      file.mdp.actions[t][s][a].c_str());
          for (double v : stage.witness->rows[s][a]) std::printf(" %.9g", v);
          std::printf("\n");
        }
    }
  }
  for (int t = 0; t < file.mdp.horizon; ++t)
    for (int s = 0; s < file.mdp.num_states(t); ++s)
      std::printf("convex marginal at (%d, %s): %s\n", t + 1, file.mdp.states[t][s].c_str(),
                  drmdp::check_convex_marginal(file.mdp, model.stages[t], t, s) ? "true" : "FALSE");
  for (int t = 0; t < file.mdp.horizon; ++t) {
    if (std::holds_alternative<drmdp::SaRectModel>(model.stages[t])) {
      std::printf("(s,a)-product membership at stage %d: structural\n", t + 1);
      continue;
    }
    drmdp::ProductProbeReport probe = drmdp::sa_product_membership_probe(model.stages[t], file.mdp, t);
    std::printf("(s,a)-product membership at stage %d: %s\n", t + 1,
                probe.product_contained ? "contained" : "NOT contained");
  }
  return 0;
}

int cmd_oracle(const std::string& path, int policy_grid, int kernel_grid, std::int64_t max_enum,
               double tol) {
  InstanceFile file = drmdp::load_instance_file(path);
  drmdp::AmbiguityModel model = effective_model(file);
  drmdp::OracleConfig config = file.oracle.value_or(drmdp::OracleConfig{});
  if (policy_grid > 0) config.policy_grid_resolution = policy_grid;
  if (kernel_grid > 0) config.kernel_grid_resolution = kernel_grid;
  if (max_enum > 0) config.max_enumeration = max_enum;

  drmdp::EquivalenceReport eq = drmdp::check_equivalence(file.mdp, model, config);
  // --tol widens the verdict band on top of the grid tolerance.
  eq.primal_equivalent =
      std::abs(eq.game_primal - eq.static_primal_value) <= eq.primal_tolerance + tol;
  std::printf("game primal:     %.12g\n", eq.game_primal);
  std::printf("game dual:       %.12g\n", eq.game_dual);
  std::printf("static primal:   %.12g  (grid tolerance %.3g)\n", eq.static_primal_value,
              eq.primal_tolerance + tol);
  std::printf("static dual lb:  %.12g\n", eq.static_dual_lb);
  std::printf("certified: %s; primal equivalent: %s; dual consistent: %s\n",
              eq.certified ? "yes" : "no", eq.primal_equivalent ? "yes" : "no",
              eq.dual_consistent ? "yes" : "no");
  std::printf("note: %s\n", eq.note.c_str());

  drmdp::EnlargementReport enl = drmdp::enlargement_invariance(file.mdp, model, config.max_enumeration);
  std::printf("enlargement invariance: primal %s (max diff %.3e), dual %s (max diff %.3e)\n",
              enl.primal_match ? "ok" : "VIOLATED", enl.max_primal_diff,
              enl.dual_match ? "ok" : "VIOLATED", enl.max_dual_diff);
  const bool pass = (!eq.certified || eq.primal_equivalent) && eq.dual_consistent &&
                    enl.primal_match && enl.dual_match;
  return pass ? 0 : 3;
}

int cmd_examples(const std::string& action, const std::string& name) {
  if (action == "list") {
    for (const std::string& n : drmdp::fixture_names()) {
      drmdp::Fixture fx = drmdp::get_fixture(n);
      std::printf("%-14s %s\n", n.c_str(), fx.description.c_str());
    }
    return 0;
  }
  if (action == "export") {
    const std::string dir = name.empty() ? "." : name;
    for (const std::string& n : drmdp::fixture_names()) {
      drmdp::Fixture fx = drmdp::get_fixture(n);
      const std::string path = dir + "/" + n + ".json";
      std::ofstream out(path);
      if (!out) throw drmdp::ValidationError("cannot write " + path);
      out << drmdp::serialize_instance_file(fx.file) << "\n";
      std::printf("wrote %s\n", path.c_str());
    }
    return 0;
  }
  if (action != "run")
    throw drmdp::ValidationError("examples: expected `list`, `run <name>` or `export <dir>`");
  std::vector<std::string> names;
  if (name == "all" || name.empty())
    names = drmdp::fixture_names();
  else
    names.push_back(name);
  bool all_pass = true;
  for (const std::string& n : names) {
    drmdp::GoldenReport rep = drmdp::run_fixture_goldens(n);
    std::printf("%s: %s\n", n.c_str(), rep.pass ? "PASS" : "FAIL");
    for (const auto& c : rep.checks)
      std::printf("  [%s] %s%s%s\n", c.pass ? "ok" : "FAIL", c.label.c_str(),
                  c.detail.empty() ? "" : ": ", c.detail.c_str());
    all_pass = all_pass && rep.pass;
  }
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-horizon distributionally robust MDP solver"};
  app.require_subcommand(1);
  app.footer(
      "exit codes: 0 success, 2 validation failure, 3 numerical failure/golden mismatch,\n"
      "            4 enumeration cap exceeded");

  std::string path, format = "table";
  bool primal_only = false, dual_only = false;
  auto* solve = app.add_subcommand("solve", "solve the game formulation of an instance file");
  solve->add_option("path", path, "instance file")->required();
  solve->add_flag("--primal", primal_only, "report the primal side only");
  solve->add_flag("--dual", dual_only, "report the dual side only");
  bool both = false;
  solve->add_flag("--both", both, "report both sides (default)");
  solve->add_option("--format", format, "output format: table|json")
      ->check(CLI::IsMember({"table", "json"}));

  std::string check_path;
  auto* chk = app.add_subcommand("check", "rectangularity and assumption report (no solving)");
  chk->add_option("path", check_path, "instance file")->required();

  std::string oracle_path;
  int policy_grid = 0, kernel_grid = 0;
  double tol = 0.0;
  std::int64_t max_enum = 0;
  auto* oracle = app.add_subcommand("oracle", "static-vs-game comparison by brute force");
  oracle->add_option("path", oracle_path, "instance file")->required();
  oracle->add_option("--policy-grid", policy_grid, "policy simplex grid resolution");
  oracle->add_option("--kernel-grid", kernel_grid, "kernel convex-weight grid resolution");
  oracle->add_option("--max-enum", max_enum, "enumeration cap");
  oracle->add_option("--tol", tol, "extra slack for the equivalence verdict");

  std::string ex_action, ex_name;
  auto* examples = app.add_subcommand("examples", "list or run the bundled fixtures");
  examples->add_option("action", ex_action, "list | run | export")->required();
  examples->add_option("name", ex_name, "fixture name, `all`, or target directory for export");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      if (primal_only && dual_only)
        throw drmdp::ValidationError("choose at most one of --primal/--dual");
      return cmd_solve(path, primal_only, dual_only, format);
    }
    if (*chk) return cmd_check(check_path);
    if (*oracle) return cmd_oracle(oracle_path, policy_grid, kernel_grid, max_enum, tol);
    if (*examples) return cmd_examples(ex_action, ex_name);
  } catch (const drmdp::CapExceededError& e) {
    std::fprintf(stderr, "error: %s (count %lld)\n", e.what(), static_cast<long long>(e.count));
    return 4;
  } catch (const drmdp::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const drmdp::NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
