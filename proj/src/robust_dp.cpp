#include "drmdp/robust_dp.hpp"

#include <algorithm>
#include <cmath>

#include "drmdp/lp.hpp"

namespace drmdp {

const char* verdict_name(AssumptionVerdict v) {
  switch (v) {
    case AssumptionVerdict::HoldsB:
      return "holds_b";
    case AssumptionVerdict::HoldsAOnly:
      return "holds_a_only";
    default:
      return "fails";
  }
}

namespace {

void check_ambiguity_shape(const MdpInstance& inst, const AmbiguityModel& ambiguity) {
  if (static_cast<int>(ambiguity.stages.size()) != inst.horizon)
    throw ValidationError("ambiguity model stage count != horizon");
}

// Stage costs must not involve the next state wherever an r-rectangular part
// is in play.
void require_next_state_independent_costs(const MdpInstance& inst, int t, const char* tag) {
  for (int s = 0; s < inst.num_states(t); ++s)
    for (int a = 0; a < inst.num_actions(t, s); ++a) {
      const Vec& row = inst.cost[t][s][a];
      for (double v : row)
        if (std::abs(v - row[0]) > 1e-12)
          throw ValidationError(std::string(tag) + " ambiguity at stage " + std::to_string(t + 1) +
                                " requires costs independent of the next state, but c(" +
                                inst.states[t][s] + ", " + inst.actions[t][s][a] +
                                ", .) varies");
    }
}

// Collapse the r-rectangular part against a continuation vector: pick
// w_i* maximizing w.v per factor (every composed row is then dominant
// coordinatewise because the coefficients are nonnegative).
Vec r_collapsed_joint(const RRectModel& r, const MdpInstance& inst, int t, int s,
                      const Vec& v_next) {
  const int nn = inst.num_states(t + 1);
  std::vector<const Vec*> best(r.factors.size());
  for (std::size_t i = 0; i < r.factors.size(); ++i) {
    double best_val = -kInf;
    for (const Vec& w : r.factors[i]) {
      double dot = 0.0;
      for (int d = 0; d < nn; ++d) dot += w[d] * v_next[d];
      if (dot > best_val + 1e-15) {
        best_val = dot;
        best[i] = &w;
      }
    }
  }
  const int na = inst.num_actions(t, s);
  Vec joint(na * nn, 0.0);
  for (int a = 0; a < na; ++a)
    for (std::size_t i = 0; i < r.factors.size(); ++i) {
      const double k = r.coeff[s][a][i];
      if (k == 0.0) continue;
      for (int d = 0; d < nn; ++d) joint[a * nn + d] += k * (*best[i])[d];
    }
  return joint;
}

// Vertex pieces used by the solvers: r-rectangular parts collapse to their
// dominant composition under the continuation values.
std::vector<Matrix> solve_pieces(const StageModel& model, const MdpInstance& inst, int t, int s,
                                 const Vec& v_next, std::int64_t cap) {
  if (const auto* m = std::get_if<RRectModel>(&model)) {
    require_next_state_independent_costs(inst, t, "r-rectangular");
    return {Matrix{r_collapsed_joint(*m, inst, t, s, v_next)}};
  }
  if (const auto* m = std::get_if<SrRectModel>(&model)) {
    require_next_state_independent_costs(inst, t, "the r-part of sr-rectangular");
    const Vec r_joint = r_collapsed_joint(m->r_part, inst, t, s, v_next);
    std::vector<Matrix> pieces;
    for (const Polytope& p : m->s_part.sets[s].pieces) {
      Matrix piece;
      for (const Vec& vs : p.vertices(cap)) {
        Vec blended(vs.size());
        for (std::size_t d = 0; d < vs.size(); ++d)
          blended[d] = m->beta * vs[d] + (1.0 - m->beta) * r_joint[d];
        piece.push_back(std::move(blended));
      }
      pieces.push_back(std::move(piece));
    }
    return pieces;
  }
  return full_marginal_pieces(model, inst, t, s, cap);
}

// w(a, v) = sum_{s'} v[a, s'] * (c_t(s, a, s') + V_next(s')).
Vec w_column(const MdpInstance& inst, int t, int s, const Vec& joint, const Vec& v_next) {
  const int na = inst.num_actions(t, s);
  const int nn = inst.num_states(t + 1);
  Vec w(na, 0.0);
  for (int a = 0; a < na; ++a) {
    double acc = 0.0;
    for (int d = 0; d < nn; ++d) acc += joint[a * nn + d] * (inst.cost[t][s][a][d] + v_next[d]);
    w[a] = acc;
  }
  return w;
}

std::vector<Matrix> w_pieces(const MdpInstance& inst, int t, int s,
                             const std::vector<Matrix>& pieces, const Vec& v_next) {
  std::vector<Matrix> out;
  out.reserve(pieces.size());
  for (const Matrix& piece : pieces) {
    Matrix cols;
    cols.reserve(piece.size());
    for (const Vec& joint : piece) cols.push_back(w_column(inst, t, s, joint, v_next));
    out.push_back(std::move(cols));
  }
  return out;
}

// (s,a)-rectangular stage subproblem: the inner maximum decouples per action,
// so min-max and max-min coincide at the best pure action.
struct SaStage {
  Vec action_values;            // max_q E[c + V] per action
  std::vector<Vec> argmax_row;  // attaining distribution per action
  int best_action = 0;
  double value = 0.0;
};

SaStage sa_stage(const SaRectModel& m, const MdpInstance& inst, int t, int s, const Vec& v_next) {
  const int na = inst.num_actions(t, s);
  const int nn = inst.num_states(t + 1);
  SaStage out;
  out.action_values.resize(na);
  out.argmax_row.resize(na);
  for (int a = 0; a < na; ++a) {
    Vec g(nn);
    for (int d = 0; d < nn; ++d) g[d] = inst.cost[t][s][a][d] + v_next[d];
    auto [val, point] = m.sets[s][a].support(g);
    out.action_values[a] = val;
    out.argmax_row[a] = std::move(point);
  }
  out.best_action = 0;
  out.value = out.action_values[0];
  for (int a = 1; a < na; ++a)
    if (out.action_values[a] < out.value - 1e-15) {
      out.value = out.action_values[a];
      out.best_action = a;
    }
  return out;
}

Vec compose_sa_joint(const SaStage& st, int na, int nn) {
  Vec joint(na * nn, 0.0);
  for (int a = 0; a < na; ++a)
    for (int d = 0; d < nn; ++d) joint[a * nn + d] = st.argmax_row[a][d];
  return joint;
}

void init_solution(RobustSolution& sol, const MdpInstance& inst) {
  sol.values.values.resize(inst.horizon + 1);
  sol.values.values[inst.horizon] = inst.terminal_cost;
  sol.policy.rows.resize(inst.horizon);
  sol.nature_joint.resize(inst.horizon);
  sol.dual_piece.resize(inst.horizon);
  sol.dual_response_action.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    sol.policy.rows[t].resize(inst.num_states(t));
    sol.nature_joint[t].resize(inst.num_states(t));
    sol.dual_piece[t].assign(inst.num_states(t), 0);
    sol.dual_response_action[t].assign(inst.num_states(t), 0);
  }
}

}  // namespace

RobustSolution solve_primal(const MdpInstance& inst, const AmbiguityModel& ambiguity) {
  check_ambiguity_shape(inst, ambiguity);
  RobustSolution sol;
  init_solution(sol, inst);
  for (int t = inst.horizon - 1; t >= 0; --t) {
    const Vec& v_next = sol.values.values[t + 1];
    sol.values.values[t].assign(inst.num_states(t), 0.0);
    for (int s = 0; s < inst.num_states(t); ++s) {
      const int na = inst.num_actions(t, s);
      const int nn = inst.num_states(t + 1);
      if (const auto* m = std::get_if<SaRectModel>(&ambiguity.stages[t])) {
        SaStage st = sa_stage(*m, inst, t, s, v_next);
        sol.values.values[t][s] = st.value;
        sol.policy.rows[t][s].assign(na, 0.0);
        sol.policy.rows[t][s][st.best_action] = 1.0;
        sol.nature_joint[t][s] = compose_sa_joint(st, na, nn);
        continue;
      }
      const auto pieces = solve_pieces(ambiguity.stages[t], inst, t, s, v_next, kDefaultEnumCap);
      const auto cols = w_pieces(inst, t, s, pieces, v_next);
      MinmaxResult res = minmax_over_union(cols, na);
      sol.values.values[t][s] = res.primal.value;
      sol.policy.rows[t][s] = res.primal.minimizer;
      // Nature's best response to the optimal mixed action, reported as an
      // extreme point (lowest index among maximizers).
      double best = -kInf;
      const Vec* best_joint = nullptr;
      for (std::size_t p = 0; p < pieces.size(); ++p)
        for (std::size_t v = 0; v < pieces[p].size(); ++v) {
          double val = 0.0;
          for (int a = 0; a < na; ++a) val += res.primal.minimizer[a] * cols[p][v][a];
          if (val > best + 1e-15) {
            best = val;
            best_joint = &pieces[p][v];
          }
        }
      sol.nature_joint[t][s] = *best_joint;
    }
  }
  return sol;
}

RobustSolution solve_dual(const MdpInstance& inst, const AmbiguityModel& ambiguity) {
  check_ambiguity_shape(inst, ambiguity);
  RobustSolution sol;
  init_solution(sol, inst);
  for (int t = inst.horizon - 1; t >= 0; --t) {
    const Vec& q_next = sol.values.values[t + 1];
    sol.values.values[t].assign(inst.num_states(t), 0.0);
    for (int s = 0; s < inst.num_states(t); ++s) {
      const int na = inst.num_actions(t, s);
      const int nn = inst.num_states(t + 1);
      if (const auto* m = std::get_if<SaRectModel>(&ambiguity.stages[t])) {
        // max over the product polytope of min_a: blocks are independent, so
        // nature maximizes each action's block and the controller takes the
        // best pure action.
        SaStage st = sa_stage(*m, inst, t, s, q_next);
        sol.values.values[t][s] = st.value;
        sol.policy.rows[t][s].assign(na, 0.0);
        sol.policy.rows[t][s][st.best_action] = 1.0;
        sol.nature_joint[t][s] = compose_sa_joint(st, na, nn);
        sol.dual_response_action[t][s] = st.best_action;
        continue;
      }
      const auto pieces = solve_pieces(ambiguity.stages[t], inst, t, s, q_next, kDefaultEnumCap);
      const auto cols = w_pieces(inst, t, s, pieces, q_next);
      MinmaxResult res = minmax_over_union(cols, na);
      sol.values.values[t][s] = res.dual.value;
      sol.policy.rows[t][s] = res.dual.minimizer;
      sol.dual_piece[t][s] = res.dual.piece_index;
      // Compose nature's committed point from the winning piece's mixture.
      const Matrix& piece = pieces[res.dual.piece_index];
      Vec joint(na * nn, 0.0);
      for (std::size_t v = 0; v < piece.size(); ++v) {
        const double wv = res.dual.maximizer[v];
        if (wv == 0.0) continue;
        for (int d = 0; d < na * nn; ++d) joint[d] += wv * piece[v][d];
      }
      sol.nature_joint[t][s] = joint;
      // Controller's pure best response to the committed point.
      const Vec w = w_column(inst, t, s, joint, q_next);
      int best_a = 0;
      for (int a = 1; a < na; ++a)
        if (w[a] < w[best_a] - 1e-15) best_a = a;
      sol.dual_response_action[t][s] = best_a;
    }
  }
  return sol;
}

ValueTable evaluate_policy_robust(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                  const RandomizedPolicy& policy) {
  check_ambiguity_shape(inst, ambiguity);
  auto violations = validate_policy(inst, policy);
  if (!violations.empty()) throw ValidationError("evaluate_policy_robust: " + violations.front());

  ValueTable table;
  table.values.resize(inst.horizon + 1);
  table.values[inst.horizon] = inst.terminal_cost;
  for (int t = inst.horizon - 1; t >= 0; --t) {
    const Vec& v_next = table.values[t + 1];
    table.values[t].assign(inst.num_states(t), 0.0);
    for (int s = 0; s < inst.num_states(t); ++s) {
      const int na = inst.num_actions(t, s);
      const Vec& pi = policy.rows[t][s];
      double best = -kInf;
      if (const auto* m = std::get_if<SaRectModel>(&ambiguity.stages[t])) {
        // The maximum decouples per action under a fixed mixed action.
        SaStage st = sa_stage(*m, inst, t, s, v_next);
        best = 0.0;
        for (int a = 0; a < na; ++a) best += pi[a] * st.action_values[a];
      } else {
        const auto pieces = solve_pieces(ambiguity.stages[t], inst, t, s, v_next, kDefaultEnumCap);
        for (const Matrix& piece : pieces)
          for (const Vec& joint : piece) {
            const Vec w = w_column(inst, t, s, joint, v_next);
            double val = 0.0;
            for (int a = 0; a < na; ++a) val += pi[a] * w[a];
            best = std::max(best, val);
          }
      }
      table.values[t][s] = best;
    }
  }
  return table;
}

namespace {

// Per-(s,a) suprema of g_a(q) = sum_s' q(s') (c + v_next) over the model's
// (s,a)-marginal, plus the per-state joint vertex pools used to look for
// simultaneous maximizers.
struct StageGeometry {
  std::vector<std::vector<double>> sup;   // [s][a]
  std::vector<Matrix> state_vertices;     // pooled joint vertices per state
};

StageGeometry stage_geometry(const MdpInstance& inst, const StageModel& model, int t,
                             const Vec& v_next, std::int64_t cap) {
  StageGeometry geo;
  const int ns = inst.num_states(t);
  const int nn = inst.num_states(t + 1);
  geo.sup.resize(ns);
  geo.state_vertices.resize(ns);
  for (int s = 0; s < ns; ++s) {
    const int na = inst.num_actions(t, s);
    geo.sup[s].assign(na, -kInf);
    Matrix pool;
    for (const Matrix& piece : full_marginal_pieces(model, inst, t, s, cap))
      for (const Vec& v : piece) pool.push_back(v);
    for (const Vec& joint : pool) {
      const Vec w = w_column(inst, t, s, joint, v_next);
      for (int a = 0; a < na; ++a) geo.sup[s][a] = std::max(geo.sup[s][a], w[a]);
    }
    geo.state_vertices[s] = std::move(pool);
    (void)nn;
  }
  return geo;
}

StageKernel kernel_from_state_joints(const MdpInstance& inst, int t,
                                     const std::vector<Vec>& joints) {
  StageKernel k;
  k.rows.resize(inst.num_states(t));
  for (int s = 0; s < inst.num_states(t); ++s)
    k.rows[s] = unflatten_joint(joints[s], inst.num_actions(t, s), inst.num_states(t + 1));
  return k;
}

StageAssumptionReport check_assumption_finite(const MdpInstance& inst,
                                              const std::vector<StageKernel>& kernels, int t,
                                              const Vec& v_next) {
  const int ns = inst.num_states(t);
  StageAssumptionReport rep;
  rep.state_witness.resize(ns);

  std::vector<std::vector<double>> sup(ns);
  for (int s = 0; s < ns; ++s) sup[s].assign(inst.num_actions(t, s), -kInf);
  std::vector<std::vector<Vec>> w_per_kernel(kernels.size());
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    w_per_kernel[k].resize(ns);
    for (int s = 0; s < ns; ++s) {
      const Vec joint = flatten_rows(kernels[k].rows[s]);
      w_per_kernel[k][s] = w_column(inst, t, s, joint, v_next);
      for (int a = 0; a < inst.num_actions(t, s); ++a)
        sup[s][a] = std::max(sup[s][a], w_per_kernel[k][s][a]);
    }
  }

  // A single kernel attaining every maximum?
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    bool all = true;
    for (int s = 0; s < ns && all; ++s)
      for (int a = 0; a < inst.num_actions(t, s) && all; ++a)
        if (w_per_kernel[k][s][a] < sup[s][a] - kWitnessTol) all = false;
    if (all) {
      rep.verdict = AssumptionVerdict::HoldsB;
      rep.witness = kernels[k];
      for (int s = 0; s < ns; ++s) rep.state_witness[s] = flatten_rows(kernels[k].rows[s]);
      return rep;
    }
  }
  // Per state?
  bool all_states = true;
  for (int s = 0; s < ns; ++s) {
    bool found = false;
    for (std::size_t k = 0; k < kernels.size() && !found; ++k) {
      bool ok = true;
      for (int a = 0; a < inst.num_actions(t, s) && ok; ++a)
        if (w_per_kernel[k][s][a] < sup[s][a] - kWitnessTol) ok = false;
      if (ok) {
        found = true;
        rep.state_witness[s] = flatten_rows(kernels[k].rows[s]);
      }
    }
    if (!found) all_states = false;
  }
  rep.verdict = all_states ? AssumptionVerdict::HoldsAOnly : AssumptionVerdict::Fails;
  if (!all_states) rep.note = "per-(s,a) maxima cannot be attained by one kernel at some state";
  return rep;
}

}  // namespace

StageAssumptionReport check_shared_worst_kernel(const MdpInstance& inst, const StageModel& model, int t,
                                           const Vec& v_next, std::int64_t cap) {
  const int ns = inst.num_states(t);
  const int nn = inst.num_states(t + 1);

  if (const auto* m = std::get_if<SingletonModel>(&model)) {
    StageAssumptionReport rep;
    rep.verdict = AssumptionVerdict::HoldsB;
    rep.witness = m->kernel;
    rep.state_witness.resize(ns);
    for (int s = 0; s < ns; ++s) rep.state_witness[s] = flatten_rows(m->kernel.rows[s]);
    rep.note = "singleton set";
    return rep;
  }

  if (const auto* m = std::get_if<SaRectModel>(&model)) {
    // Per-(s,a) maxima are independent, so their argmaxes assemble into one
    // kernel by rectangularity.
    StageAssumptionReport rep;
    rep.verdict = AssumptionVerdict::HoldsB;
    rep.state_witness.resize(ns);
    StageKernel witness;
    witness.rows.resize(ns);
    for (int s = 0; s < ns; ++s) {
      SaStage st = sa_stage(*m, inst, t, s, v_next);
      witness.rows[s] = st.argmax_row;
      rep.state_witness[s] = compose_sa_joint(st, inst.num_actions(t, s), nn);
    }
    rep.witness = std::move(witness);
    rep.note = "structural: (s,a)-rectangular";
    return rep;
  }

  if (const auto* m = std::get_if<RRectModel>(&model)) {
    bool costs_flat = true;
    for (int s = 0; s < ns && costs_flat; ++s)
      for (int a = 0; a < inst.num_actions(t, s) && costs_flat; ++a)
        for (double v : inst.cost[t][s][a])
          if (std::abs(v - inst.cost[t][s][a][0]) > 1e-12) costs_flat = false;
    if (costs_flat) {
      // Constructive witness: factor-wise argmax against the continuation.
      StageAssumptionReport rep;
      rep.verdict = AssumptionVerdict::HoldsB;
      rep.state_witness.resize(ns);
      StageKernel witness;
      witness.rows.resize(ns);
      for (int s = 0; s < ns; ++s) {
        const Vec joint = r_collapsed_joint(*m, inst, t, s, v_next);
        rep.state_witness[s] = joint;
        witness.rows[s] = unflatten_joint(joint, inst.num_actions(t, s), nn);
      }
      rep.witness = std::move(witness);
      rep.note = "structural: r-rectangular, factor-wise argmax witness";
      return rep;
    }
    return check_assumption_finite(inst, enumerate_extreme_kernels(model, inst, t, cap), t, v_next);
  }

  if (const auto* m = std::get_if<SrRectModel>(&model)) {
    if (m->beta >= 1.0 - 1e-15)
      return check_shared_worst_kernel(inst, StageModel{m->s_part}, t, v_next, cap);
    if (m->beta <= 1e-15) return check_shared_worst_kernel(inst, StageModel{m->r_part}, t, v_next, cap);
    // A blend attains its per-(s,a) maxima iff both parts attain theirs.
    StageAssumptionReport rs = check_shared_worst_kernel(inst, StageModel{m->s_part}, t, v_next, cap);
    StageAssumptionReport rr = check_shared_worst_kernel(inst, StageModel{m->r_part}, t, v_next, cap);
    StageAssumptionReport rep;
    rep.state_witness.resize(ns);
    const auto combine = [&](AssumptionVerdict a, AssumptionVerdict b) {
      return static_cast<AssumptionVerdict>(std::min(static_cast<int>(a), static_cast<int>(b)));
    };
    rep.verdict = combine(rs.verdict, rr.verdict);
    rep.note = std::string("blend: s-part ") + verdict_name(rs.verdict) + ", r-part " +
               verdict_name(rr.verdict);
    if (rep.verdict == AssumptionVerdict::HoldsB && rs.witness && rr.witness) {
      StageKernel witness;
      witness.rows.resize(ns);
      for (int s = 0; s < ns; ++s) {
        witness.rows[s].resize(inst.num_actions(t, s));
        for (int a = 0; a < inst.num_actions(t, s); ++a) {
          Vec row(nn, 0.0);
          for (int d = 0; d < nn; ++d)
            row[d] = m->beta * rs.witness->rows[s][a][d] + (1.0 - m->beta) * rr.witness->rows[s][a][d];
          witness.rows[s][a] = std::move(row);
        }
      }
      rep.witness = std::move(witness);
    }
    if (rep.verdict != AssumptionVerdict::Fails) {
      for (int s = 0; s < ns; ++s)
        if (rs.state_witness[s] && rr.state_witness[s]) {
          Vec joint(inst.num_actions(t, s) * nn, 0.0);
          for (std::size_t d = 0; d < joint.size(); ++d)
            joint[d] = m->beta * (*rs.state_witness[s])[d] + (1.0 - m->beta) * (*rr.state_witness[s])[d];
          rep.state_witness[s] = std::move(joint);
        }
    }
    return rep;
  }

  if (const auto* m = std::get_if<FiniteKernelSetModel>(&model)) {
    // For the hull variant the listed kernels are the candidate extremes; a
    // simultaneous maximizer exists iff one of them works (face argument).
    return check_assumption_finite(inst, m->kernels, t, v_next);
  }

  // s-rectangular: states are independent, so per-state witnesses assemble.
  const auto& m = std::get<SRectModel>(model);
  (void)m;
  StageGeometry geo = stage_geometry(inst, model, t, v_next, cap);
  StageAssumptionReport rep;
  rep.state_witness.resize(ns);
  bool all_states = true;
  std::vector<Vec> chosen(ns);
  for (int s = 0; s < ns; ++s) {
    bool found = false;
    for (const Vec& joint : geo.state_vertices[s]) {
      const Vec w = w_column(inst, t, s, joint, v_next);
      bool ok = true;
      for (int a = 0; a < inst.num_actions(t, s) && ok; ++a)
        if (w[a] < geo.sup[s][a] - kWitnessTol) ok = false;
      if (ok) {
        found = true;
        rep.state_witness[s] = joint;
        chosen[s] = joint;
        break;
      }
    }
    if (!found) all_states = false;
  }
  if (all_states) {
    rep.verdict = AssumptionVerdict::HoldsB;
    rep.witness = kernel_from_state_joints(inst, t, chosen);
    rep.note = "per-state witnesses assembled (s-rectangular)";
  } else {
    rep.verdict = AssumptionVerdict::Fails;
    rep.note = "some state's per-action maxima require different kernels";
  }
  return rep;
}

AssumptionSummary check_shared_worst_kernel_all(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                           const ValueTable& primal_values, std::int64_t cap) {
  AssumptionSummary out;
  out.verdict = AssumptionVerdict::HoldsB;
  for (int t = 0; t < inst.horizon; ++t) {
    out.stages.push_back(
        check_shared_worst_kernel(inst, ambiguity.stages[t], t, primal_values.values[t + 1], cap));
    out.verdict = static_cast<AssumptionVerdict>(
        std::min(static_cast<int>(out.verdict), static_cast<int>(out.stages.back().verdict)));
  }
  return out;
}

bool check_convex_marginal(const MdpInstance& inst, const StageModel& model, int t, int s,
                           std::int64_t cap) {
  const auto pieces = full_marginal_pieces(model, inst, t, s, cap);
  if (pieces.size() == 1) return true;
  Matrix pooled;
  for (const Matrix& piece : pieces)
    for (const Vec& v : piece) pooled.push_back(v);
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j) {
      Vec mid(pooled[i].size());
      for (std::size_t d = 0; d < mid.size(); ++d) mid[d] = 0.5 * (pooled[i][d] + pooled[j][d]);
      bool member = false;
      for (const Matrix& piece : pieces)
        if (in_hull(mid, piece, kWitnessTol)) {
          member = true;
          break;
        }
      if (!member) return false;
    }
  return true;
}

RobustSolveReport diagnose(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                           std::int64_t cap) {
  auto inst_violations = validate_instance(inst);
  if (!inst_violations.empty()) throw ValidationError("diagnose: " + inst_violations.front());
  auto model_violations = validate_ambiguity(ambiguity, inst, cap);
  if (!model_violations.empty()) throw ValidationError("diagnose: " + model_violations.front());

  RobustSolveReport rep;
  RobustSolution primal = solve_primal(inst, ambiguity);
  RobustSolution dual = solve_dual(inst, ambiguity);
  rep.primal_values = primal.values;
  rep.dual_values = dual.values;
  rep.controller_policy = primal.policy;
  rep.nature_primal_response = primal.nature_joint;
  rep.nature_dual_policy = dual.nature_joint;
  rep.gap = primal.values.at_initial(inst) - dual.values.at_initial(inst);

  rep.per_state_saddle.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    rep.per_state_saddle[t].resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s)
      rep.per_state_saddle[t][s] =
          std::abs(primal.values.values[t][s] - dual.values.values[t][s]) <= kSaddleTol;
  }

  rep.assumption = check_shared_worst_kernel_all(inst, ambiguity, primal.values, cap);

  rep.convex_marginal.resize(inst.horizon);
  rep.convex_marginal_all = true;
  for (int t = 0; t < inst.horizon; ++t) {
    rep.convex_marginal[t].resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s) {
      rep.convex_marginal[t][s] = check_convex_marginal(inst, ambiguity.stages[t], t, s, cap);
      if (!rep.convex_marginal[t][s]) rep.convex_marginal_all = false;
    }
  }

  // Pure-action extraction against the primal continuation values.
  rep.det_policy.resize(inst.horizon);
  rep.det_policy_exists = true;
  for (int t = 0; t < inst.horizon; ++t) {
    rep.det_policy[t].assign(inst.num_states(t), 0);
    const Vec& v_next = primal.values.values[t + 1];
    for (int s = 0; s < inst.num_states(t); ++s) {
      const int na = inst.num_actions(t, s);
      Vec pure(na, -kInf);
      if (const auto* m = std::get_if<SaRectModel>(&ambiguity.stages[t])) {
        pure = sa_stage(*m, inst, t, s, v_next).action_values;
      } else {
        const auto pieces = solve_pieces(ambiguity.stages[t], inst, t, s, v_next, cap);
        pure.assign(na, -kInf);
        for (const Matrix& piece : pieces)
          for (const Vec& joint : piece) {
            const Vec w = w_column(inst, t, s, joint, v_next);
            for (int a = 0; a < na; ++a) pure[a] = std::max(pure[a], w[a]);
          }
      }
      int best = 0;
      for (int a = 1; a < na; ++a)
        if (pure[a] < pure[best] - 1e-15) best = a;
      rep.det_policy[t][s] = best;
      if (pure[best] > primal.values.values[t][s] + kGapTol) rep.det_policy_exists = false;
    }
  }

  if (rep.assumption.verdict != AssumptionVerdict::Fails) {
    rep.assumption_implies_no_gap_checked = true;
    rep.assumption_implies_no_gap_ok = rep.gap <= kGapTol;
  }
  if (rep.convex_marginal_all) {
    rep.convexity_implies_saddle_checked = true;
    for (int t = 0; t < inst.horizon; ++t)
      for (int s = 0; s < inst.num_states(t); ++s)
        if (!rep.per_state_saddle[t][s]) rep.convexity_implies_saddle_ok = false;
  }
  rep.remark =
      "randomized nature policies over distributions on the stage sets are not computed; "
      "with them the stage games always admit saddle points";
  return rep;
}

}  // namespace drmdp
