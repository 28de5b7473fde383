#include "drmdp/mdp.hpp"

#include <algorithm>
#include <cmath>

namespace drmdp {

int MdpInstance::state_index(int t, const std::string& name) const {
  const auto& names = states[t];
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw ValidationError("unknown state '" + name + "' at stage " + std::to_string(t + 1));
  return static_cast<int>(it - names.begin());
}

double MdpInstance::max_abs_cost() const {
  double m = 0.0;
  for (const auto& per_s : cost)
    for (const auto& per_a : per_s)
      for (const auto& per_next : per_a)
        for (double v : per_next) m = std::max(m, std::abs(v));
  for (double v : terminal_cost) m = std::max(m, std::abs(v));
  return m;
}

std::vector<std::string> validate_instance(const MdpInstance& inst) {
  std::vector<std::string> out;
  auto bad = [&](const std::string& msg) { out.push_back(msg); };

  if (inst.horizon < 1) bad("horizon must be >= 1");
  if (static_cast<int>(inst.states.size()) != inst.horizon + 1) {
    bad("states must list horizon+1 stages");
    return out;
  }
  for (int t = 0; t <= inst.horizon; ++t)
    if (inst.states[t].empty()) bad("stage " + std::to_string(t + 1) + ": empty state set");
  if (static_cast<int>(inst.actions.size()) != inst.horizon) {
    bad("actions must list horizon stages");
    return out;
  }
  for (int t = 0; t < inst.horizon; ++t) {
    if (static_cast<int>(inst.actions[t].size()) != inst.num_states(t)) {
      bad("stage " + std::to_string(t + 1) + ": action map size != state count");
      continue;
    }
    for (int s = 0; s < inst.num_states(t); ++s)
      if (inst.actions[t][s].empty())
        bad("(" + std::to_string(t + 1) + ", " + inst.states[t][s] + "): empty action set");
  }
  if (static_cast<int>(inst.cost.size()) != inst.horizon) {
    bad("cost must list horizon stages");
    return out;
  }
  for (int t = 0; t < inst.horizon; ++t) {
    if (static_cast<int>(inst.cost[t].size()) != inst.num_states(t)) {
      bad("stage " + std::to_string(t + 1) + ": cost table state count mismatch");
      continue;
    }
    for (int s = 0; s < inst.num_states(t); ++s) {
      if (static_cast<int>(inst.cost[t][s].size()) != inst.num_actions(t, s)) {
        bad("(" + std::to_string(t + 1) + ", " + inst.states[t][s] + "): cost table action count mismatch");
        continue;
      }
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        if (static_cast<int>(inst.cost[t][s][a].size()) != inst.num_states(t + 1)) {
          bad("(" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " + inst.actions[t][s][a] +
              "): cost row length != next-stage state count");
          continue;
        }
        for (double v : inst.cost[t][s][a])
          if (!std::isfinite(v))
            bad("(" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " + inst.actions[t][s][a] +
                "): non-finite cost");
      }
    }
  }
  if (static_cast<int>(inst.terminal_cost.size()) != inst.num_states(inst.horizon))
    bad("terminal cost length != terminal state count");
  else
    for (double v : inst.terminal_cost)
      if (!std::isfinite(v)) bad("non-finite terminal cost");
  if (inst.initial_state < 0 || inst.initial_state >= inst.num_states(0))
    bad("initial state out of range");
  return out;
}

std::vector<std::string> validate_kernel(const MdpInstance& inst, const Kernel& kernel) {
  std::vector<std::string> out;
  if (static_cast<int>(kernel.stages.size()) != inst.horizon) {
    out.push_back("kernel stage count != horizon");
    return out;
  }
  for (int t = 0; t < inst.horizon; ++t) {
    const auto& st = kernel.stages[t];
    if (static_cast<int>(st.rows.size()) != inst.num_states(t)) {
      out.push_back("kernel stage " + std::to_string(t + 1) + ": state count mismatch");
      continue;
    }
    for (int s = 0; s < inst.num_states(t); ++s) {
      if (static_cast<int>(st.rows[s].size()) != inst.num_actions(t, s)) {
        out.push_back("kernel (" + std::to_string(t + 1) + ", " + inst.states[t][s] +
                      "): action count mismatch");
        continue;
      }
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        const Vec& row = st.rows[s][a];
        if (static_cast<int>(row.size()) != inst.num_states(t + 1)) {
          out.push_back("kernel (" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " +
                        inst.actions[t][s][a] + "): row length mismatch");
          continue;
        }
        double sum = 0.0;
        bool neg = false;
        for (double v : row) {
          if (v < -kProbTol || v > 1.0 + kProbTol) neg = true;
          sum += v;
        }
        if (neg || std::abs(sum - 1.0) > kProbTol)
          out.push_back("kernel (" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " +
                        inst.actions[t][s][a] + "): row not a distribution (sum " +
                        std::to_string(sum) + ")");
      }
    }
  }
  return out;
}

std::vector<std::string> validate_policy(const MdpInstance& inst, const RandomizedPolicy& policy) {
  std::vector<std::string> out;
  if (static_cast<int>(policy.rows.size()) != inst.horizon) {
    out.push_back("policy stage count != horizon");
    return out;
  }
  for (int t = 0; t < inst.horizon; ++t) {
    if (static_cast<int>(policy.rows[t].size()) != inst.num_states(t)) {
      out.push_back("policy stage " + std::to_string(t + 1) + ": state count mismatch");
      continue;
    }
    for (int s = 0; s < inst.num_states(t); ++s) {
      const Vec& row = policy.rows[t][s];
      if (static_cast<int>(row.size()) != inst.num_actions(t, s)) {
        out.push_back("policy (" + std::to_string(t + 1) + ", " + inst.states[t][s] +
                      "): action count mismatch");
        continue;
      }
      double sum = 0.0;
      bool neg = false;
      for (double v : row) {
        if (v < -kProbTol) neg = true;
        sum += v;
      }
      if (neg || std::abs(sum - 1.0) > kProbTol)
        out.push_back("policy (" + std::to_string(t + 1) + ", " + inst.states[t][s] +
                      "): row not in the simplex (sum " + std::to_string(sum) + ")");
    }
  }
  return out;
}

bool is_deterministic(const RandomizedPolicy& policy) {
  for (const auto& stage : policy.rows)
    for (const Vec& row : stage) {
      const double top = *std::max_element(row.begin(), row.end());
      if (top < 1.0 - kProbTol) return false;
    }
  return true;
}

RandomizedPolicy uniform_policy(const MdpInstance& inst) {
  RandomizedPolicy p;
  p.rows.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    p.rows[t].resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s)
      p.rows[t][s].assign(inst.num_actions(t, s), 1.0 / inst.num_actions(t, s));
  }
  return p;
}

RandomizedPolicy deterministic_policy(const MdpInstance& inst,
                                      const std::vector<std::vector<int>>& action_choice) {
  RandomizedPolicy p;
  p.rows.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    p.rows[t].resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s) {
      p.rows[t][s].assign(inst.num_actions(t, s), 0.0);
      p.rows[t][s].at(action_choice[t][s]) = 1.0;
    }
  }
  return p;
}

void normalize_distribution(Vec& row, double tol) {
  double sum = 0.0;
  for (double& v : row) {
    if (v < -tol) throw ValidationError("distribution entry below zero beyond tolerance");
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw ValidationError("distribution sums to " + std::to_string(sum));
  for (double& v : row) v /= sum;
}

ValueTable evaluate_policy(const MdpInstance& inst, const RandomizedPolicy& policy,
                           const Kernel& kernel) {
  if (static_cast<int>(kernel.stages.size()) != inst.horizon)
    throw ValidationError("evaluate_policy: kernel has " + std::to_string(kernel.stages.size()) +
                          " stages, expected " + std::to_string(inst.horizon));
  if (static_cast<int>(policy.rows.size()) != inst.horizon)
    throw ValidationError("evaluate_policy: policy has " + std::to_string(policy.rows.size()) +
                          " stages, expected " + std::to_string(inst.horizon));

  ValueTable table;
  table.values.resize(inst.horizon + 1);
  table.values[inst.horizon] = inst.terminal_cost;
  for (int t = inst.horizon - 1; t >= 0; --t) {
    const int ns = inst.num_states(t);
    table.values[t].assign(ns, 0.0);
    for (int s = 0; s < ns; ++s) {
      const int na = inst.num_actions(t, s);
      if (static_cast<int>(policy.rows[t][s].size()) != na ||
          static_cast<int>(kernel.stages[t].rows[s].size()) != na)
        throw ValidationError("evaluate_policy: dimension mismatch at stage " + std::to_string(t + 1));
      double v = 0.0;
      for (int a = 0; a < na; ++a) {
        const double pa = policy.rows[t][s][a];
        if (pa == 0.0) continue;
        const Vec& row = kernel.stages[t].rows[s][a];
        if (row.size() != table.values[t + 1].size())
          throw ValidationError("evaluate_policy: kernel row length mismatch at stage " +
                                std::to_string(t + 1));
        double q = 0.0;
        for (std::size_t nxt = 0; nxt < row.size(); ++nxt)
          q += row[nxt] * (inst.cost[t][s][a][nxt] + table.values[t + 1][nxt]);
        v += pa * q;
      }
      table.values[t][s] = v;
    }
  }
  return table;
}

NominalSolution solve_nominal(const MdpInstance& inst, const Kernel& kernel) {
  if (static_cast<int>(kernel.stages.size()) != inst.horizon)
    throw ValidationError("solve_nominal: kernel stage count mismatch");

  NominalSolution out;
  out.values.values.resize(inst.horizon + 1);
  out.values.values[inst.horizon] = inst.terminal_cost;
  out.policy.rows.resize(inst.horizon);
  for (int t = inst.horizon - 1; t >= 0; --t) {
    const int ns = inst.num_states(t);
    out.values.values[t].assign(ns, 0.0);
    out.policy.rows[t].resize(ns);
    for (int s = 0; s < ns; ++s) {
      const int na = inst.num_actions(t, s);
      double best = kInf;
      int best_a = 0;
      for (int a = 0; a < na; ++a) {
        const Vec& row = kernel.stages[t].rows[s][a];
        double q = 0.0;
        for (std::size_t nxt = 0; nxt < row.size(); ++nxt)
          q += row[nxt] * (inst.cost[t][s][a][nxt] + out.values.values[t + 1][nxt]);
        if (q < best - 1e-15) {  // ties keep the lowest action index
          best = q;
          best_a = a;
        }
      }
      out.values.values[t][s] = best;
      out.policy.rows[t][s].assign(na, 0.0);
      out.policy.rows[t][s][best_a] = 1.0;
    }
  }
  return out;
}

}  // namespace drmdp
