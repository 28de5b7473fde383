#include "drmdp/fixtures.hpp"

#include <cmath>
#include <cstdio>

#include "drmdp/robust_dp.hpp"
#include "drmdp/static_oracle.hpp"

namespace drmdp {

MdpInstance two_action_instance(double v_high, double v_low) {
  MdpInstance inst;
  inst.horizon = 1;
  inst.states = {{"s_A"}, {"s_B", "s_C"}};
  inst.actions = {{{"a_L", "a_R"}}};
  inst.cost = {{{{0.0, 0.0}, {0.0, 0.0}}}};
  inst.terminal_cost = {v_high, v_low};
  inst.initial_state = 0;
  return inst;
}

RRectModel coupled_segment_r_rect() {
  RRectModel m;
  m.factors = {
      {{0.0, 1.0}},
      {{1.0 / 3.0, 2.0 / 3.0}},
      {{0.0, 0.0}, {1.0, -1.0}},
  };
  m.coeff = {{{1.0, 0.0, 1.0}, {0.0, 1.0, 1.0 / 3.0}}};
  return m;
}

SRectModel mirrored_segment_s_rect(const std::vector<std::pair<double, double>>& intervals) {
  SRectModel m;
  m.sets.resize(1);
  for (const auto& [lo, hi] : intervals) {
    Matrix verts;
    for (double p : {lo, hi}) verts.push_back({p, 1.0 - p, 1.0 - p, p});
    m.sets[0].pieces.push_back(Polytope::from_vertices(std::move(verts)));
  }
  return m;
}

namespace {

InstanceFile make_ex_2_1() {
  InstanceFile file;
  file.mdp = two_action_instance(1.0, 0.0);
  AmbiguityModel model;
  model.stages.push_back(coupled_segment_r_rect());
  file.ambiguity = std::move(model);
  OracleConfig oc;
  oc.policy_grid_resolution = 100;
  oc.kernel_grid_resolution = 20;
  file.oracle = oc;
  return file;
}

InstanceFile make_ex_2_2() {
  InstanceFile file;
  file.mdp = two_action_instance(1.0, 0.0);
  AmbiguityModel model;
  model.stages.push_back(mirrored_segment_s_rect({{0.0, 0.25}, {0.75, 1.0}}));
  file.ambiguity = std::move(model);
  OracleConfig oc;
  oc.policy_grid_resolution = 100;
  oc.kernel_grid_resolution = 20;
  file.oracle = oc;
  return file;
}

InstanceFile make_ex_2_3() {
  InstanceFile file;
  file.mdp = two_action_instance(1.0, 0.0);
  AmbiguityModel model;
  model.stages.push_back(mirrored_segment_s_rect({{0.0, 1.0}}));
  file.ambiguity = std::move(model);
  OracleConfig oc;
  oc.policy_grid_resolution = 100;
  oc.kernel_grid_resolution = 20;
  file.oracle = oc;
  return file;
}

InstanceFile make_fig_2_sr() {
  InstanceFile file;
  MdpInstance inst;
  inst.horizon = 1;
  inst.states = {{"s_A", "s_Ap"}, {"s_B", "s_Bp", "s_C", "s_Cp"}};
  inst.actions = {{{"a_L", "a_R"}, {"a_L", "a_R"}}};
  inst.cost = {{
      {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}},
      {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}},
  }};
  inst.terminal_cost = {1.0, 1.0, 0.0, 0.0};
  inst.initial_state = 0;
  file.mdp = inst;

  SRectModel s_part;
  s_part.sets.resize(2);
  s_part.sets[0].pieces.push_back(Polytope::from_vertices({
      {0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0},  // q = 0
      {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0},  // q = 1
  }));
  s_part.sets[1].pieces.push_back(Polytope::from_vertices({
      {0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0},  // z = 0
      {0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0},  // z = 1
  }));

  RRectModel r_part;
  r_part.factors = {
      {{0.0, 0.0, 1.0, 0.0}},
      {{1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0}},
      {{0.0, 0.0, 0.0, 0.0}, {1.0, 0.0, -1.0, 0.0}},
      {{0.0, 0.0, 0.0, 1.0}},
      {{0.0, 1.0 / 3.0, 0.0, 2.0 / 3.0}},
      {{0.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, -1.0}},
  };
  r_part.coeff = {
      {{1.0, 0.0, 1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 1.0 / 3.0, 0.0, 0.0, 0.0}},
      {{0.0, 0.0, 0.0, 1.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 0.0, 1.0, 1.0 / 3.0}},
  };

  AmbiguityModel model;
  model.stages.push_back(compose_sr(0.5, std::move(s_part), std::move(r_part), inst, 0));
  file.ambiguity = std::move(model);
  OracleConfig oc;
  oc.policy_grid_resolution = 40;
  oc.kernel_grid_resolution = 10;
  file.oracle = oc;
  return file;
}

InstanceFile make_avar_demo() {
  InstanceFile file;
  MdpInstance inst;
  inst.horizon = 1;
  inst.states = {{"s_0"}, {"s_high", "s_low"}};
  inst.actions = {{{"a"}}};
  inst.cost = {{{{0.0, 0.0}}}};
  inst.terminal_cost = {1.0, 0.0};
  inst.initial_state = 0;
  file.mdp = inst;

  AvarSpec spec;
  spec.alpha = 0.5;
  StageKernel ref;
  ref.rows = {{{0.5, 0.5}}};
  spec.reference_kernel.stages.push_back(std::move(ref));
  file.avar = std::move(spec);
  return file;
}

InstanceFile make_soc_demo() {
  InstanceFile file;
  SocSpec spec;
  spec.horizon = 1;
  spec.states = {{"s_1", "s_2"}, {"u_1", "u_2", "u_3", "u_4"}};
  spec.actions = {{"a"}};
  spec.noise = {{"lo", "hi"}};
  spec.transition = {{{{0, 1}}, {{2, 3}}}};
  spec.cost = {{{{0.0, 0.0}}, {{0.0, 0.0}}}};
  spec.noise_ambiguity = {Polytope::from_vertices({{0.2, 0.8}, {0.8, 0.2}})};
  spec.terminal_cost = {1.0, 0.0, 0.0, 1.0};
  spec.initial_state = 0;

  // The induced MDP shares the SOC shape; the file carries both views.
  SocInduced induced = build_soc_ambiguity(spec);
  file.mdp = induced.instance;
  file.ambiguity = induced.ambiguity;
  file.soc = std::move(spec);
  return file;
}

InstanceFile make_cost_interval() {
  InstanceFile file;
  MdpInstance inst;
  inst.horizon = 1;
  inst.states = {{"s_0"}, {"s_x", "s_y"}};
  inst.actions = {{{"a_1", "a_2"}}};
  inst.cost = {{{{1.0, 1.0}, {1.0, 1.0}}}};
  inst.terminal_cost = {0.0, 0.0};
  inst.initial_state = 0;
  file.mdp = inst;

  Kernel kernel;
  StageKernel st;
  st.rows = {{{0.7, 0.3}, {0.4, 0.6}}};
  kernel.stages.push_back(std::move(st));
  file.kernel = std::move(kernel);

  auto box = [](double center, double radius) {
    Matrix verts;
    for (double dx : {-radius, radius})
      for (double dy : {-radius, radius}) verts.push_back({center + dx, center + dy});
    return Polytope::from_vertices(std::move(verts));
  };
  CostSaRectModel stage;
  stage.sets = {{box(1.0, 0.5), box(1.0, 0.2)}};
  CostAmbiguityModel model;
  model.stages.push_back(std::move(stage));
  file.cost_ambiguity = std::move(model);
  return file;
}

struct Entry {
  const char* name;
  const char* description;
  InstanceFile (*make)();
};

const Entry kEntries[] = {
    {"ex_2_1", "coupled-segment kernel set; a shared worst kernel exists", make_ex_2_1},
    {"ex_2_2", "mirrored segments with a hole; strict duality gap", make_ex_2_2},
    {"ex_2_3", "full mirrored segment; randomized optimum, zero gap", make_ex_2_3},
    {"fig_2_sr", "two-state blend of s- and r-rectangular parts", make_fig_2_sr},
    {"avar_demo", "risk level 1/2 over a two-point terminal lottery", make_avar_demo},
    {"soc_demo", "noise-induced kernel set with distinct images", make_soc_demo},
    {"cost_interval", "box cost ambiguity around unit stage costs", make_cost_interval},
};

void check(GoldenReport& rep, const std::string& label, bool pass, const std::string& detail) {
  rep.checks.push_back({label, pass, detail});
  if (!pass) rep.pass = false;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const Entry& e : kEntries) out.push_back(e.name);
  return out;
}

Fixture get_fixture(const std::string& name) {
  for (const Entry& e : kEntries)
    if (name == e.name) return Fixture{e.name, e.description, e.make()};
  throw ValidationError("unknown fixture '" + name + "'; try `examples list`");
}

GoldenReport run_fixture_goldens(const std::string& name) {
  Fixture fx = get_fixture(name);
  GoldenReport rep;
  rep.name = name;
  rep.pass = true;

  try {
    if (name == "ex_2_1") {
      RobustSolveReport d = diagnose(fx.file.mdp, *fx.file.ambiguity);
      check(rep, "primal value 2/3", std::abs(d.primal_values.at_initial(fx.file.mdp) - 2.0 / 3.0) <= kValueTol,
            num(d.primal_values.at_initial(fx.file.mdp)));
      check(rep, "gap closed", d.gap <= kGapTol, num(d.gap));
      const auto& stage = d.assumption.stages[0];
      check(rep, "shared worst kernel exists", stage.verdict == AssumptionVerdict::HoldsB,
            verdict_name(stage.verdict));
      bool witness_ok = false;
      if (stage.witness) {
        const auto& w = *stage.witness;
        witness_ok = std::abs(w.rows[0][0][0] - 1.0) <= kWitnessTol &&
                     std::abs(w.rows[0][1][0] - 2.0 / 3.0) <= kWitnessTol;
      }
      check(rep, "witness kernel (1, 2/3)", witness_ok, "");
      check(rep, "deterministic optimum", d.det_policy_exists && d.det_policy[0][0] == 1, "");
    } else if (name == "ex_2_2") {
      RobustSolveReport d = diagnose(fx.file.mdp, *fx.file.ambiguity);
      check(rep, "primal value 0.5", std::abs(d.primal_values.at_initial(fx.file.mdp) - 0.5) <= kValueTol,
            num(d.primal_values.at_initial(fx.file.mdp)));
      check(rep, "dual value 0.25", std::abs(d.dual_values.at_initial(fx.file.mdp) - 0.25) <= kValueTol,
            num(d.dual_values.at_initial(fx.file.mdp)));
      check(rep, "gap 0.25", std::abs(d.gap - 0.25) <= kValueTol, num(d.gap));
      check(rep, "marginal not convex", !d.convex_marginal[0][0], "");
      check(rep, "no saddle at the initial state", !d.per_state_saddle[0][0], "");
    } else if (name == "ex_2_3") {
      RobustSolveReport d = diagnose(fx.file.mdp, *fx.file.ambiguity);
      check(rep, "value 0.5 with zero gap",
            std::abs(d.primal_values.at_initial(fx.file.mdp) - 0.5) <= kValueTol && d.gap <= kGapTol,
            num(d.gap));
      const Vec& pi = d.controller_policy.rows[0][0];
      check(rep, "optimal mixed action (1/2, 1/2)",
            std::abs(pi[0] - 0.5) <= kGapTol && std::abs(pi[1] - 0.5) <= kGapTol,
            num(pi[0]) + "," + num(pi[1]));
      check(rep, "no shared worst kernel",
            d.assumption.stages[0].verdict == AssumptionVerdict::Fails, "");
      check(rep, "convex marginal", d.convex_marginal[0][0], "");
    } else if (name == "fig_2_sr") {
      RobustSolveReport d = diagnose(fx.file.mdp, *fx.file.ambiguity);
      check(rep, "gap closed", d.gap <= kGapTol, num(d.gap));
      const Vec& pi = d.controller_policy.rows[0][0];
      check(rep, "optimal mixed action (1/2, 1/2)",
            std::abs(pi[0] - 0.5) <= kGapTol && std::abs(pi[1] - 0.5) <= kGapTol,
            num(pi[0]) + "," + num(pi[1]));
      ProductProbeReport probe = sa_product_membership_probe(fx.file.ambiguity->stages[0], fx.file.mdp, 0);
      check(rep, "not (s,a)-rectangular", probe.conclusive && !probe.product_contained,
            num(probe.witness_distance));
      check(rep, "no state-wise worst kernel",
            d.assumption.stages[0].verdict == AssumptionVerdict::Fails, "");
    } else if (name == "avar_demo") {
      NestedRiskSolution nested = solve_nested_risk(fx.file.mdp, *fx.file.avar);
      check(rep, "nested value 1", std::abs(nested.values.at_initial(fx.file.mdp) - 1.0) <= kValueTol,
            num(nested.values.at_initial(fx.file.mdp)));
      AmbiguityModel induced = build_avar_ambiguity(*fx.file.avar, fx.file.mdp);
      RobustSolveReport d = diagnose(fx.file.mdp, induced);
      check(rep, "robust value matches",
            std::abs(d.primal_values.at_initial(fx.file.mdp) -
                     nested.values.at_initial(fx.file.mdp)) <= kValueTol,
            num(d.primal_values.at_initial(fx.file.mdp)));
      check(rep, "gap closed", d.gap <= kGapTol, num(d.gap));
    } else if (name == "soc_demo") {
      SocProbeReport probe = soc_rectangularity_probe(*fx.file.soc);
      check(rep, "probe applicable", probe.applicable, "");
      check(rep, "induced set not s-rectangular", probe.not_s_rectangular,
            num(probe.product.witness_distance));
      SocSolution sol = solve_soc(*fx.file.soc);
      check(rep, "noise-space value 0.8", std::abs(sol.values.values[0][0] - 0.8) <= kValueTol,
            num(sol.values.values[0][0]));
      RobustSolveReport d = diagnose(fx.file.mdp, *fx.file.ambiguity);
      check(rep, "induced game matches",
            std::abs(d.primal_values.at_initial(fx.file.mdp) - sol.values.values[0][0]) <= kValueTol,
            num(d.primal_values.at_initial(fx.file.mdp)));
      check(rep, "gap closed", d.gap <= kGapTol, num(d.gap));
    } else if (name == "cost_interval") {
      CostRobustSolution p = solve_primal_cost(fx.file.mdp, *fx.file.kernel, *fx.file.cost_ambiguity);
      check(rep, "worst-case value 1.2", std::abs(p.values.at_initial(fx.file.mdp) - 1.2) <= kValueTol,
            num(p.values.at_initial(fx.file.mdp)));
      ValueTable reg = solve_via_regularization(fx.file.mdp, *fx.file.kernel, *fx.file.cost_ambiguity);
      check(rep, "regularized form agrees",
            std::abs(reg.at_initial(fx.file.mdp) - p.values.at_initial(fx.file.mdp)) <= 1e-8,
            num(reg.at_initial(fx.file.mdp)));
      AssumptionSummary sum =
          check_shared_worst_cost_all(fx.file.mdp, *fx.file.kernel, *fx.file.cost_ambiguity, p.values);
      check(rep, "shared worst cost exists", sum.verdict == AssumptionVerdict::HoldsB,
            verdict_name(sum.verdict));
    } else {
      check(rep, "goldens defined", false, "no goldens for fixture");
    }
  } catch (const std::exception& e) {
    check(rep, "execution", false, e.what());
  }
  return rep;
}

}  // namespace drmdp
