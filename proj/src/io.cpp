#include "drmdp/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace drmdp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw ValidationError(context + ": " + what);
}

void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& context) {
  if (!j.is_object()) fail(context, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        ok = true;
        break;
      }
    if (!ok) fail(context, "unknown key '" + it.key() + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) fail(context, std::string("missing key '") + key + "'");
  return *it;
}

double as_number(const json& j, const std::string& context) {
  if (!j.is_number()) fail(context, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& context) {
  if (!j.is_number_integer()) fail(context, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& context) {
  if (!j.is_string()) fail(context, "expected a string");
  return j.get<std::string>();
}

Vec as_vec(const json& j, const std::string& context) {
  if (!j.is_array()) fail(context, "expected an array of numbers");
  Vec out;
  for (const auto& v : j) out.push_back(as_number(v, context));
  return out;
}

Matrix as_matrix(const json& j, const std::string& context) {
  if (!j.is_array()) fail(context, "expected an array of arrays");
  Matrix out;
  for (const auto& row : j) out.push_back(as_vec(row, context));
  return out;
}

// ---- polytopes ----

Polytope parse_polytope(const json& j, const std::string& context) {
  expect_keys(j, {"vertices", "halfspaces"}, context);
  if (j.contains("vertices")) {
    if (j.contains("halfspaces")) fail(context, "give either vertices or halfspaces, not both");
    return Polytope::from_vertices(as_matrix(j["vertices"], context + ".vertices"));
  }
  if (!j.contains("halfspaces")) fail(context, "missing vertices or halfspaces");
  const json& h = j["halfspaces"];
  expect_keys(h, {"dim", "ineq_lhs", "ineq_rhs", "eq_lhs", "eq_rhs"}, context + ".halfspaces");
  Halfspaces hs;
  hs.ineq_lhs = as_matrix(require(h, "ineq_lhs", context), context);
  hs.ineq_rhs = as_vec(require(h, "ineq_rhs", context), context);
  if (h.contains("eq_lhs")) hs.eq_lhs = as_matrix(h["eq_lhs"], context);
  if (h.contains("eq_rhs")) hs.eq_rhs = as_vec(h["eq_rhs"], context);
  return Polytope::from_halfspaces(as_int(require(h, "dim", context), context), std::move(hs));
}

json dump_polytope(const Polytope& p) {
  json j;
  if (p.vertex_form) {
    j["vertices"] = p.vertex_list;
  } else {
    json h;
    h["dim"] = p.dim;
    h["ineq_lhs"] = p.halfspaces.ineq_lhs;
    h["ineq_rhs"] = p.halfspaces.ineq_rhs;
    if (!p.halfspaces.eq_lhs.empty()) {
      h["eq_lhs"] = p.halfspaces.eq_lhs;
      h["eq_rhs"] = p.halfspaces.eq_rhs;
    }
    j["halfspaces"] = std::move(h);
  }
  return j;
}

// ---- mdp ----

MdpInstance parse_mdp(const json& j) {
  expect_keys(j, {"horizon", "states", "actions", "costs", "terminal_costs", "initial_state"},
              "mdp");
  MdpInstance inst;
  inst.horizon = as_int(require(j, "horizon", "mdp"), "mdp.horizon");

  const json& states = require(j, "states", "mdp");
  if (!states.is_array()) fail("mdp.states", "expected an array per stage");
  for (const auto& stage : states) {
    std::vector<std::string> names;
    for (const auto& s : stage) names.push_back(as_string(s, "mdp.states"));
    inst.states.push_back(std::move(names));
  }
  if (static_cast<int>(inst.states.size()) != inst.horizon + 1)
    fail("mdp.states", "must list horizon+1 stages");

  const json& actions = require(j, "actions", "mdp");
  if (!actions.is_array() || static_cast<int>(actions.size()) != inst.horizon)
    fail("mdp.actions", "expected one object per decision stage");
  inst.actions.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    const json& stage = actions[t];
    if (!stage.is_object()) fail("mdp.actions", "expected state-keyed objects");
    inst.actions[t].resize(inst.num_states(t));
    for (auto it = stage.begin(); it != stage.end(); ++it) {
      const int s = inst.state_index(t, it.key());
      std::vector<std::string> names;
      for (const auto& a : it.value()) names.push_back(as_string(a, "mdp.actions"));
      inst.actions[t][s] = std::move(names);
    }
    for (int s = 0; s < inst.num_states(t); ++s)
      if (inst.actions[t][s].empty())
        fail("mdp.actions", "no actions for state '" + inst.states[t][s] + "' at stage " +
                                std::to_string(t + 1));
  }

  inst.cost.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    inst.cost[t].resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s)
      inst.cost[t][s].assign(inst.num_actions(t, s), Vec(inst.num_states(t + 1), 0.0));
  }
  if (j.contains("costs")) {
    const json& costs = j["costs"];
    if (!costs.is_array() || static_cast<int>(costs.size()) != inst.horizon)
      fail("mdp.costs", "expected one object per decision stage");
    for (int t = 0; t < inst.horizon; ++t) {
      const json& stage = costs[t];
      if (!stage.is_object()) fail("mdp.costs", "expected state-keyed objects");
      for (auto it = stage.begin(); it != stage.end(); ++it) {
        const int s = inst.state_index(t, it.key());
        if (!it.value().is_object()) fail("mdp.costs", "expected action-keyed objects");
        for (auto at = it.value().begin(); at != it.value().end(); ++at) {
          const auto& names = inst.actions[t][s];
          auto found = std::find(names.begin(), names.end(), at.key());
          if (found == names.end())
            fail("mdp.costs", "unknown action '" + at.key() + "' at state '" + it.key() + "'");
          const int a = static_cast<int>(found - names.begin());
          Vec row = as_vec(at.value(), "mdp.costs");
          if (static_cast<int>(row.size()) != inst.num_states(t + 1))
            fail("mdp.costs", "cost row length mismatch at (" + it.key() + ", " + at.key() + ")");
          inst.cost[t][s][a] = std::move(row);
        }
      }
    }
  }

  const json& term = require(j, "terminal_costs", "mdp");
  if (!term.is_object()) fail("mdp.terminal_costs", "expected a state-keyed object");
  inst.terminal_cost.assign(inst.num_states(inst.horizon), 0.0);
  for (auto it = term.begin(); it != term.end(); ++it)
    inst.terminal_cost[inst.state_index(inst.horizon, it.key())] =
        as_number(it.value(), "mdp.terminal_costs");

  inst.initial_state =
      inst.state_index(0, as_string(require(j, "initial_state", "mdp"), "mdp.initial_state"));

  auto violations = validate_instance(inst);
  if (!violations.empty()) fail("mdp", violations.front());
  return inst;
}

json dump_mdp(const MdpInstance& inst) {
  json j;
  j["horizon"] = inst.horizon;
  j["states"] = inst.states;
  json actions = json::array();
  for (int t = 0; t < inst.horizon; ++t) {
    json stage = json::object();
    for (int s = 0; s < inst.num_states(t); ++s) stage[inst.states[t][s]] = inst.actions[t][s];
    actions.push_back(std::move(stage));
  }
  j["actions"] = std::move(actions);
  json costs = json::array();
  for (int t = 0; t < inst.horizon; ++t) {
    json stage = json::object();
    for (int s = 0; s < inst.num_states(t); ++s) {
      json per_a = json::object();
      for (int a = 0; a < inst.num_actions(t, s); ++a)
        per_a[inst.actions[t][s][a]] = inst.cost[t][s][a];
      stage[inst.states[t][s]] = std::move(per_a);
    }
    costs.push_back(std::move(stage));
  }
  j["costs"] = std::move(costs);
  json term = json::object();
  for (int s = 0; s < inst.num_states(inst.horizon); ++s)
    term[inst.states[inst.horizon][s]] = inst.terminal_cost[s];
  j["terminal_costs"] = std::move(term);
  j["initial_state"] = inst.states[0][inst.initial_state];
  return j;
}

// ---- kernels ----

StageKernel parse_stage_kernel(const json& j, const MdpInstance& inst, int t,
                               const std::string& context) {
  if (!j.is_object()) fail(context, "expected a state-keyed object");
  StageKernel k;
  k.rows.resize(inst.num_states(t));
  for (int s = 0; s < inst.num_states(t); ++s)
    k.rows[s].assign(inst.num_actions(t, s), Vec());
  for (auto it = j.begin(); it != j.end(); ++it) {
    const int s = inst.state_index(t, it.key());
    if (!it.value().is_object()) fail(context, "expected action-keyed objects");
    for (auto at = it.value().begin(); at != it.value().end(); ++at) {
      const auto& names = inst.actions[t][s];
      auto found = std::find(names.begin(), names.end(), at.key());
      if (found == names.end()) fail(context, "unknown action '" + at.key() + "'");
      Vec row = as_vec(at.value(), context);
      if (static_cast<int>(row.size()) != inst.num_states(t + 1))
        fail(context, "kernel row length mismatch");
      normalize_distribution(row);
      k.rows[s][static_cast<int>(found - names.begin())] = std::move(row);
    }
  }
  for (int s = 0; s < inst.num_states(t); ++s)
    for (int a = 0; a < inst.num_actions(t, s); ++a)
      if (k.rows[s][a].empty())
        fail(context, "missing row for (" + inst.states[t][s] + ", " + inst.actions[t][s][a] + ")");
  return k;
}

json dump_stage_kernel(const StageKernel& k, const MdpInstance& inst, int t) {
  json j = json::object();
  for (int s = 0; s < inst.num_states(t); ++s) {
    json per_a = json::object();
    for (int a = 0; a < inst.num_actions(t, s); ++a) per_a[inst.actions[t][s][a]] = k.rows[s][a];
    j[inst.states[t][s]] = std::move(per_a);
  }
  return j;
}

Kernel parse_kernel(const json& j, const MdpInstance& inst, const std::string& context) {
  if (!j.is_array() || static_cast<int>(j.size()) != inst.horizon)
    fail(context, "expected one stage kernel per decision stage");
  Kernel k;
  for (int t = 0; t < inst.horizon; ++t)
    k.stages.push_back(parse_stage_kernel(j[t], inst, t, context));
  return k;
}

json dump_kernel(const Kernel& k, const MdpInstance& inst) {
  json j = json::array();
  for (int t = 0; t < inst.horizon; ++t) j.push_back(dump_stage_kernel(k.stages[t], inst, t));
  return j;
}

// ---- ambiguity models ----

StageModel parse_stage_model(const json& j, const MdpInstance& inst, int t);

SRectModel parse_s_rect(const json& j, const MdpInstance& inst, int t, const std::string& context) {
  expect_keys(j, {"type", "sets"}, context);
  const json& sets = require(j, "sets", context);
  SRectModel m;
  m.sets.resize(inst.num_states(t));
  for (auto it = sets.begin(); it != sets.end(); ++it) {
    const int s = inst.state_index(t, it.key());
    expect_keys(it.value(), {"pieces"}, context + "." + it.key());
    for (const auto& piece : require(it.value(), "pieces", context))
      m.sets[s].pieces.push_back(parse_polytope(piece, context + "." + it.key()));
  }
  for (int s = 0; s < inst.num_states(t); ++s)
    if (m.sets[s].pieces.empty())
      fail(context, "no pieces for state '" + inst.states[t][s] + "'");
  return m;
}

RRectModel parse_r_rect(const json& j, const MdpInstance& inst, int t, const std::string& context) {
  expect_keys(j, {"type", "factors", "coefficients"}, context);
  RRectModel m;
  for (const auto& f : require(j, "factors", context))
    m.factors.push_back(as_matrix(require(f, "vertices", context), context + ".factors"));
  const json& coeff = require(j, "coefficients", context);
  m.coeff.resize(inst.num_states(t));
  for (int s = 0; s < inst.num_states(t); ++s)
    m.coeff[s].assign(inst.num_actions(t, s), Vec(m.factors.size(), 0.0));
  for (auto it = coeff.begin(); it != coeff.end(); ++it) {
    const int s = inst.state_index(t, it.key());
    for (auto at = it.value().begin(); at != it.value().end(); ++at) {
      const auto& names = inst.actions[t][s];
      auto found = std::find(names.begin(), names.end(), at.key());
      if (found == names.end()) fail(context, "unknown action '" + at.key() + "'");
      Vec k = as_vec(at.value(), context);
      if (k.size() != m.factors.size()) fail(context, "coefficient count != factor count");
      m.coeff[s][static_cast<int>(found - names.begin())] = std::move(k);
    }
  }
  return m;
}

StageModel parse_stage_model(const json& j, const MdpInstance& inst, int t) {
  const std::string context = "ambiguity[" + std::to_string(t) + "]";
  const std::string type = as_string(require(j, "type", context), context + ".type");
  if (type == "singleton") {
    expect_keys(j, {"type", "kernel"}, context);
    return SingletonModel{parse_stage_kernel(require(j, "kernel", context), inst, t, context)};
  }
  if (type == "finite") {
    expect_keys(j, {"type", "kernels", "convex_hull"}, context);
    FiniteKernelSetModel m;
    for (const auto& k : require(j, "kernels", context))
      m.kernels.push_back(parse_stage_kernel(k, inst, t, context));
    if (j.contains("convex_hull")) {
      if (!j["convex_hull"].is_boolean()) fail(context, "convex_hull must be a boolean");
      m.convex_hull = j["convex_hull"].get<bool>();
    }
    return m;
  }
  if (type == "sa_rect") {
    expect_keys(j, {"type", "sets"}, context);
    SaRectModel m;
    m.sets.resize(inst.num_states(t));
    const json& sets = require(j, "sets", context);
    for (auto it = sets.begin(); it != sets.end(); ++it) {
      const int s = inst.state_index(t, it.key());
      m.sets[s].resize(inst.num_actions(t, s));
      std::vector<bool> given(inst.num_actions(t, s), false);
      for (auto at = it.value().begin(); at != it.value().end(); ++at) {
        const auto& names = inst.actions[t][s];
        auto found = std::find(names.begin(), names.end(), at.key());
        if (found == names.end()) fail(context, "unknown action '" + at.key() + "'");
        const int a = static_cast<int>(found - names.begin());
        m.sets[s][a] = parse_polytope(at.value(), context + "." + it.key() + "." + at.key());
        given[a] = true;
      }
      for (int a = 0; a < inst.num_actions(t, s); ++a)
        if (!given[a])
          fail(context, "missing polytope for (" + inst.states[t][s] + ", " +
                            inst.actions[t][s][a] + ")");
    }
    for (int s = 0; s < inst.num_states(t); ++s)
      if (m.sets[s].empty()) fail(context, "missing sets for state '" + inst.states[t][s] + "'");
    return m;
  }
  if (type == "s_rect") return parse_s_rect(j, inst, t, context);
  if (type == "r_rect") return parse_r_rect(j, inst, t, context);
  if (type == "sr_rect") {
    expect_keys(j, {"type", "beta", "s_part", "r_part"}, context);
    SrRectModel m;
    m.beta = as_number(require(j, "beta", context), context + ".beta");
    m.s_part = parse_s_rect(require(j, "s_part", context), inst, t, context + ".s_part");
    m.r_part = parse_r_rect(require(j, "r_part", context), inst, t, context + ".r_part");
    return m;
  }
  fail(context, "unknown model type '" + type + "'");
}

json dump_stage_model(const StageModel& model, const MdpInstance& inst, int t);

json dump_s_rect(const SRectModel& m, const MdpInstance& inst, int t) {
  json sets = json::object();
  for (int s = 0; s < inst.num_states(t); ++s) {
    json pieces = json::array();
    for (const Polytope& p : m.sets[s].pieces) pieces.push_back(dump_polytope(p));
    sets[inst.states[t][s]] = json{{"pieces", std::move(pieces)}};
  }
  return json{{"type", "s_rect"}, {"sets", std::move(sets)}};
}

json dump_r_rect(const RRectModel& m, const MdpInstance& inst, int t) {
  json factors = json::array();
  for (const Matrix& f : m.factors) factors.push_back(json{{"vertices", f}});
  json coeff = json::object();
  for (int s = 0; s < inst.num_states(t); ++s) {
    json per_a = json::object();
    for (int a = 0; a < inst.num_actions(t, s); ++a) per_a[inst.actions[t][s][a]] = m.coeff[s][a];
    coeff[inst.states[t][s]] = std::move(per_a);
  }
  return json{{"type", "r_rect"}, {"factors", std::move(factors)}, {"coefficients", std::move(coeff)}};
}

json dump_stage_model(const StageModel& model, const MdpInstance& inst, int t) {
  if (const auto* m = std::get_if<SingletonModel>(&model))
    return json{{"type", "singleton"}, {"kernel", dump_stage_kernel(m->kernel, inst, t)}};
  if (const auto* m = std::get_if<FiniteKernelSetModel>(&model)) {
    json kernels = json::array();
    for (const StageKernel& k : m->kernels) kernels.push_back(dump_stage_kernel(k, inst, t));
    return json{{"type", "finite"}, {"kernels", std::move(kernels)}, {"convex_hull", m->convex_hull}};
  }
  if (const auto* m = std::get_if<SaRectModel>(&model)) {
    json sets = json::object();
    for (int s = 0; s < inst.num_states(t); ++s) {
      json per_a = json::object();
      for (int a = 0; a < inst.num_actions(t, s); ++a)
        per_a[inst.actions[t][s][a]] = dump_polytope(m->sets[s][a]);
      sets[inst.states[t][s]] = std::move(per_a);
    }
    return json{{"type", "sa_rect"}, {"sets", std::move(sets)}};
  }
  if (const auto* m = std::get_if<SRectModel>(&model)) return dump_s_rect(*m, inst, t);
  if (const auto* m = std::get_if<RRectModel>(&model)) return dump_r_rect(*m, inst, t);
  const auto& m = std::get<SrRectModel>(model);
  return json{{"type", "sr_rect"},
              {"beta", m.beta},
              {"s_part", dump_s_rect(m.s_part, inst, t)},
              {"r_part", dump_r_rect(m.r_part, inst, t)}};
}

// ---- cost models ----

StageCostTable parse_cost_table(const json& j, const MdpInstance& inst, int t,
                                const std::string& context) {
  StageCostTable tbl;
  tbl.entries.resize(inst.num_states(t));
  for (int s = 0; s < inst.num_states(t); ++s)
    tbl.entries[s].assign(inst.num_actions(t, s), Vec(inst.num_states(t + 1), 0.0));
  if (!j.is_object()) fail(context, "expected a state-keyed object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const int s = inst.state_index(t, it.key());
    for (auto at = it.value().begin(); at != it.value().end(); ++at) {
      const auto& names = inst.actions[t][s];
      auto found = std::find(names.begin(), names.end(), at.key());
      if (found == names.end()) fail(context, "unknown action '" + at.key() + "'");
      Vec row = as_vec(at.value(), context);
      if (static_cast<int>(row.size()) != inst.num_states(t + 1))
        fail(context, "cost row length mismatch");
      tbl.entries[s][static_cast<int>(found - names.begin())] = std::move(row);
    }
  }
  return tbl;
}

json dump_cost_table(const StageCostTable& tbl, const MdpInstance& inst, int t) {
  json j = json::object();
  for (int s = 0; s < inst.num_states(t); ++s) {
    json per_a = json::object();
    for (int a = 0; a < inst.num_actions(t, s); ++a)
      per_a[inst.actions[t][s][a]] = tbl.entries[s][a];
    j[inst.states[t][s]] = std::move(per_a);
  }
  return j;
}

StageCostModel parse_stage_cost_model(const json& j, const MdpInstance& inst, int t) {
  const std::string context = "cost_ambiguity[" + std::to_string(t) + "]";
  const std::string type = as_string(require(j, "type", context), context + ".type");
  if (type == "singleton") {
    expect_keys(j, {"type", "table"}, context);
    return CostSingletonModel{parse_cost_table(require(j, "table", context), inst, t, context)};
  }
  if (type == "finite") {
    expect_keys(j, {"type", "tables"}, context);
    FiniteCostSetModel m;
    for (const auto& tbl : require(j, "tables", context))
      m.tables.push_back(parse_cost_table(tbl, inst, t, context));
    return m;
  }
  if (type == "sa_rect") {
    expect_keys(j, {"type", "sets"}, context);
    CostSaRectModel m;
    m.sets.resize(inst.num_states(t));
    const json& sets = require(j, "sets", context);
    for (auto it = sets.begin(); it != sets.end(); ++it) {
      const int s = inst.state_index(t, it.key());
      m.sets[s].resize(inst.num_actions(t, s));
      for (auto at = it.value().begin(); at != it.value().end(); ++at) {
        const auto& names = inst.actions[t][s];
        auto found = std::find(names.begin(), names.end(), at.key());
        if (found == names.end()) fail(context, "unknown action '" + at.key() + "'");
        m.sets[s][static_cast<int>(found - names.begin())] =
            parse_polytope(at.value(), context + "." + it.key() + "." + at.key());
      }
    }
    return m;
  }
  if (type == "s_rect") {
    expect_keys(j, {"type", "sets"}, context);
    CostSRectModel m;
    m.sets.resize(inst.num_states(t));
    const json& sets = require(j, "sets", context);
    for (auto it = sets.begin(); it != sets.end(); ++it) {
      const int s = inst.state_index(t, it.key());
      expect_keys(it.value(), {"pieces"}, context);
      for (const auto& piece : require(it.value(), "pieces", context))
        m.sets[s].pieces.push_back(parse_polytope(piece, context));
    }
    return m;
  }
  fail(context, "unknown cost model type '" + type + "'");
}

json dump_stage_cost_model(const StageCostModel& model, const MdpInstance& inst, int t) {
  if (const auto* m = std::get_if<CostSingletonModel>(&model))
    return json{{"type", "singleton"}, {"table", dump_cost_table(m->table, inst, t)}};
  if (const auto* m = std::get_if<FiniteCostSetModel>(&model)) {
    json tables = json::array();
    for (const StageCostTable& tbl : m->tables) tables.push_back(dump_cost_table(tbl, inst, t));
    return json{{"type", "finite"}, {"tables", std::move(tables)}};
  }
  if (const auto* m = std::get_if<CostSaRectModel>(&model)) {
    json sets = json::object();
    for (int s = 0; s < inst.num_states(t); ++s) {
      json per_a = json::object();
      for (int a = 0; a < inst.num_actions(t, s); ++a)
        per_a[inst.actions[t][s][a]] = dump_polytope(m->sets[s][a]);
      sets[inst.states[t][s]] = std::move(per_a);
    }
    return json{{"type", "sa_rect"}, {"sets", std::move(sets)}};
  }
  const auto& m = std::get<CostSRectModel>(model);
  json sets = json::object();
  for (int s = 0; s < inst.num_states(t); ++s) {
    json pieces = json::array();
    for (const Polytope& p : m.sets[s].pieces) pieces.push_back(dump_polytope(p));
    sets[inst.states[t][s]] = json{{"pieces", std::move(pieces)}};
  }
  return json{{"type", "s_rect"}, {"sets", std::move(sets)}};
}

// ---- soc ----

SocSpec parse_soc(const json& j) {
  expect_keys(j,
              {"horizon", "states", "actions", "noise", "transition", "cost", "noise_ambiguity",
               "terminal_costs", "initial_state"},
              "soc");
  SocSpec spec;
  spec.horizon = as_int(require(j, "horizon", "soc"), "soc.horizon");
  for (const auto& stage : require(j, "states", "soc")) {
    std::vector<std::string> names;
    for (const auto& s : stage) names.push_back(as_string(s, "soc.states"));
    spec.states.push_back(std::move(names));
  }
  for (const auto& stage : require(j, "actions", "soc")) {
    std::vector<std::string> names;
    for (const auto& a : stage) names.push_back(as_string(a, "soc.actions"));
    spec.actions.push_back(std::move(names));
  }
  for (const auto& stage : require(j, "noise", "soc")) {
    std::vector<std::string> names;
    for (const auto& x : stage) names.push_back(as_string(x, "soc.noise"));
    spec.noise.push_back(std::move(names));
  }

  auto index_of = [&](const std::vector<std::string>& names, const std::string& name,
                      const std::string& context) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) fail(context, "unknown name '" + name + "'");
    return static_cast<int>(it - names.begin());
  };

  const json& transition = require(j, "transition", "soc");
  const json& cost = require(j, "cost", "soc");
  if (static_cast<int>(transition.size()) != spec.horizon ||
      static_cast<int>(cost.size()) != spec.horizon)
    fail("soc", "transition/cost must list horizon stages");
  spec.transition.resize(spec.horizon);
  spec.cost.resize(spec.horizon);
  for (int t = 0; t < spec.horizon; ++t) {
    const int ns = spec.num_states(t);
    const int na = spec.num_actions(t);
    const int nx = spec.num_noise(t);
    spec.transition[t].assign(ns, std::vector<std::vector<int>>(na, std::vector<int>(nx, -1)));
    spec.cost[t].assign(ns, std::vector<Vec>(na, Vec(nx, 0.0)));
    for (auto it = transition[t].begin(); it != transition[t].end(); ++it) {
      const int s = index_of(spec.states[t], it.key(), "soc.transition");
      for (auto at = it.value().begin(); at != it.value().end(); ++at) {
        const int a = index_of(spec.actions[t], at.key(), "soc.transition");
        for (auto xt = at.value().begin(); xt != at.value().end(); ++xt) {
          const int x = index_of(spec.noise[t], xt.key(), "soc.transition");
          spec.transition[t][s][a][x] =
              index_of(spec.states[t + 1], as_string(xt.value(), "soc.transition"), "soc.transition");
        }
      }
    }
    for (auto it = cost[t].begin(); it != cost[t].end(); ++it) {
      const int s = index_of(spec.states[t], it.key(), "soc.cost");
      for (auto at = it.value().begin(); at != it.value().end(); ++at) {
        const int a = index_of(spec.actions[t], at.key(), "soc.cost");
        for (auto xt = at.value().begin(); xt != at.value().end(); ++xt) {
          const int x = index_of(spec.noise[t], xt.key(), "soc.cost");
          spec.cost[t][s][a][x] = as_number(xt.value(), "soc.cost");
        }
      }
    }
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a)
        for (int x = 0; x < nx; ++x)
          if (spec.transition[t][s][a][x] < 0)
            fail("soc.transition", "missing image for (" + spec.states[t][s] + ", " +
                                       spec.actions[t][a] + ", " + spec.noise[t][x] + ")");
  }

  for (const auto& p : require(j, "noise_ambiguity", "soc"))
    spec.noise_ambiguity.push_back(parse_polytope(p, "soc.noise_ambiguity"));

  const json& term = require(j, "terminal_costs", "soc");
  spec.terminal_cost.assign(spec.num_states(spec.horizon), 0.0);
  for (auto it = term.begin(); it != term.end(); ++it)
    spec.terminal_cost[index_of(spec.states[spec.horizon], it.key(), "soc.terminal_costs")] =
        as_number(it.value(), "soc.terminal_costs");
  spec.initial_state = index_of(
      spec.states[0], as_string(require(j, "initial_state", "soc"), "soc"), "soc.initial_state");

  auto violations = validate_soc_spec(spec);
  if (!violations.empty()) fail("soc", violations.front());
  return spec;
}

json dump_soc(const SocSpec& spec) {
  json j;
  j["horizon"] = spec.horizon;
  j["states"] = spec.states;
  j["actions"] = spec.actions;
  j["noise"] = spec.noise;
  json transition = json::array();
  json cost = json::array();
  for (int t = 0; t < spec.horizon; ++t) {
    json tr = json::object();
    json co = json::object();
    for (int s = 0; s < spec.num_states(t); ++s) {
      json tr_a = json::object();
      json co_a = json::object();
      for (int a = 0; a < spec.num_actions(t); ++a) {
        json tr_x = json::object();
        json co_x = json::object();
        for (int x = 0; x < spec.num_noise(t); ++x) {
          tr_x[spec.noise[t][x]] = spec.states[t + 1][spec.transition[t][s][a][x]];
          co_x[spec.noise[t][x]] = spec.cost[t][s][a][x];
        }
        tr_a[spec.actions[t][a]] = std::move(tr_x);
        co_a[spec.actions[t][a]] = std::move(co_x);
      }
      tr[spec.states[t][s]] = std::move(tr_a);
      co[spec.states[t][s]] = std::move(co_a);
    }
    transition.push_back(std::move(tr));
    cost.push_back(std::move(co));
  }
  j["transition"] = std::move(transition);
  j["cost"] = std::move(cost);
  json polys = json::array();
  for (const Polytope& p : spec.noise_ambiguity) polys.push_back(dump_polytope(p));
  j["noise_ambiguity"] = std::move(polys);
  json term = json::object();
  for (int s = 0; s < spec.num_states(spec.horizon); ++s)
    term[spec.states[spec.horizon][s]] = spec.terminal_cost[s];
  j["terminal_costs"] = std::move(term);
  j["initial_state"] = spec.states[0][spec.initial_state];
  return j;
}

}  // namespace

InstanceFile parse_instance_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("json parse error: ") + e.what());
  }
  expect_keys(j, {"mdp", "kernel", "ambiguity", "cost_ambiguity", "avar", "soc", "oracle"},
              "instance file");

  InstanceFile file;
  file.mdp = parse_mdp(require(j, "mdp", "instance file"));

  if (j.contains("kernel")) file.kernel = parse_kernel(j["kernel"], file.mdp, "kernel");

  if (j.contains("ambiguity")) {
    const json& amb = j["ambiguity"];
    if (!amb.is_array() || static_cast<int>(amb.size()) != file.mdp.horizon)
      fail("ambiguity", "expected one stage model per decision stage");
    AmbiguityModel model;
    for (int t = 0; t < file.mdp.horizon; ++t)
      model.stages.push_back(parse_stage_model(amb[t], file.mdp, t));
    auto violations = validate_ambiguity(model, file.mdp);
    if (!violations.empty()) fail("ambiguity", violations.front());
    file.ambiguity = std::move(model);
  }

  if (j.contains("cost_ambiguity")) {
    const json& amb = j["cost_ambiguity"];
    if (!amb.is_array() || static_cast<int>(amb.size()) != file.mdp.horizon)
      fail("cost_ambiguity", "expected one stage model per decision stage");
    CostAmbiguityModel model;
    for (int t = 0; t < file.mdp.horizon; ++t)
      model.stages.push_back(parse_stage_cost_model(amb[t], file.mdp, t));
    auto violations = validate_cost_ambiguity(model, file.mdp);
    if (!violations.empty()) fail("cost_ambiguity", violations.front());
    file.cost_ambiguity = std::move(model);
  }

  if (j.contains("avar")) {
    const json& av = j["avar"];
    expect_keys(av, {"alpha", "reference_kernel"}, "avar");
    AvarSpec spec;
    spec.alpha = as_number(require(av, "alpha", "avar"), "avar.alpha");
    spec.reference_kernel = parse_kernel(require(av, "reference_kernel", "avar"), file.mdp, "avar");
    auto violations = validate_avar_spec(spec, file.mdp);
    if (!violations.empty()) fail("avar", violations.front());
    file.avar = std::move(spec);
  }

  if (j.contains("soc")) file.soc = parse_soc(j["soc"]);

  if (j.contains("oracle")) {
    const json& oc = j["oracle"];
    expect_keys(oc, {"policy_grid_resolution", "kernel_grid_resolution", "max_enumeration"},
                "oracle");
    OracleConfig config;
    if (oc.contains("policy_grid_resolution"))
      config.policy_grid_resolution = as_int(oc["policy_grid_resolution"], "oracle");
    if (oc.contains("kernel_grid_resolution"))
      config.kernel_grid_resolution = as_int(oc["kernel_grid_resolution"], "oracle");
    if (oc.contains("max_enumeration"))
      config.max_enumeration = static_cast<std::int64_t>(as_number(oc["max_enumeration"], "oracle"));
    if (config.policy_grid_resolution < 1 || config.kernel_grid_resolution < 1 ||
        config.max_enumeration < 1)
      fail("oracle", "resolutions and cap must be >= 1");
    file.oracle = config;
  }
  return file;
}

InstanceFile load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance_text(ss.str());
}

std::string serialize_instance_file(const InstanceFile& file) {
  json j;
  j["mdp"] = dump_mdp(file.mdp);
  if (file.kernel) j["kernel"] = dump_kernel(*file.kernel, file.mdp);
  if (file.ambiguity) {
    json amb = json::array();
    for (int t = 0; t < file.mdp.horizon; ++t)
      amb.push_back(dump_stage_model(file.ambiguity->stages[t], file.mdp, t));
    j["ambiguity"] = std::move(amb);
  }
  if (file.cost_ambiguity) {
    json amb = json::array();
    for (int t = 0; t < file.mdp.horizon; ++t)
      amb.push_back(dump_stage_cost_model(file.cost_ambiguity->stages[t], file.mdp, t));
    j["cost_ambiguity"] = std::move(amb);
  }
  if (file.avar) {
    j["avar"] = json{{"alpha", file.avar->alpha},
                     {"reference_kernel", dump_kernel(file.avar->reference_kernel, file.mdp)}};
  }
  if (file.soc) j["soc"] = dump_soc(*file.soc);
  if (file.oracle) {
    j["oracle"] = json{{"policy_grid_resolution", file.oracle->policy_grid_resolution},
                       {"kernel_grid_resolution", file.oracle->kernel_grid_resolution},
                       {"max_enumeration", file.oracle->max_enumeration}};
  }
  return j.dump(2);
}

bool instance_files_equal(const InstanceFile& a, const InstanceFile& b) {
  // Structural equality via the canonical serialization.
  return serialize_instance_file(a) == serialize_instance_file(b);
}

}  // namespace drmdp
