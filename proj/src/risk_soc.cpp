#include "drmdp/risk_soc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "drmdp/lp.hpp"

namespace drmdp {
namespace {

void check_avar_inputs(const Vec& values, const Vec& probabilities, double alpha) {
  if (alpha <= 0.0 || alpha > 1.0)
    throw ValidationError("avar: alpha must lie in (0, 1], got " + std::to_string(alpha));
  if (values.size() != probabilities.size()) throw ValidationError("avar: size mismatch");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("avar: non-finite value");
  double sum = 0.0;
  for (double p : probabilities) {
    if (p < -kProbTol) throw ValidationError("avar: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTol)
    throw ValidationError("avar: probabilities sum to " + std::to_string(sum));
}

}  // namespace

double avar_sorting(const Vec& values, const Vec& probabilities, double alpha) {
  check_avar_inputs(values, probabilities, alpha);
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });

  // Smallest minimizer of tau + E[(Z - tau)_+]/alpha: the least support point
  // z with P(Z > z) <= alpha.
  double tau = values[order.back()];
  for (int i = 0; i < n; ++i) {
    const int idx = order[i];
    if (probabilities[idx] <= 0.0) continue;
    double tail = 0.0;
    for (int j = 0; j < n; ++j)
      if (values[j] > values[idx]) tail += probabilities[j];
    if (tail <= alpha + 1e-15) {
      tau = values[idx];
      break;
    }
  }
  double excess = 0.0;
  for (int i = 0; i < n; ++i)
    if (values[i] > tau) excess += probabilities[i] * (values[i] - tau);
  return tau + excess / alpha;
}

double avar_lp(const Vec& values, const Vec& probabilities, double alpha) {
  check_avar_inputs(values, probabilities, alpha);
  const int n = static_cast<int>(values.size());
  LinearProgram lp;
  lp.objective.resize(n);
  for (int i = 0; i < n; ++i) lp.objective[i] = -values[i];
  lp.lower.assign(n, 0.0);
  lp.upper.resize(n);
  for (int i = 0; i < n; ++i) lp.upper[i] = probabilities[i] / alpha;
  Vec sum(n, 1.0);
  lp.add_eq(std::move(sum), 1.0);
  LpSolution sol = solve_lp(lp);
  if (!sol.ok()) throw NumericalError("avar: dual LP failed");
  return -sol.value;
}

double avar(const Vec& values, const Vec& probabilities, double alpha) {
  const double by_sort = avar_sorting(values, probabilities, alpha);
  const double by_lp = avar_lp(values, probabilities, alpha);
  if (std::abs(by_sort - by_lp) > 1e-9)
    throw NumericalError("avar: sorting and LP forms disagree: " + std::to_string(by_sort) +
                         " vs " + std::to_string(by_lp));
  return by_sort;
}

std::vector<std::string> validate_avar_spec(const AvarSpec& spec, const MdpInstance& inst) {
  std::vector<std::string> out;
  if (spec.alpha <= 0.0 || spec.alpha > 1.0) out.push_back("avar: alpha must lie in (0, 1]");
  auto sub = validate_kernel(inst, spec.reference_kernel);
  out.insert(out.end(), sub.begin(), sub.end());
  return out;
}

AmbiguityModel build_avar_ambiguity(const AvarSpec& spec, const MdpInstance& inst) {
  auto violations = validate_avar_spec(spec, inst);
  if (!violations.empty()) throw ValidationError("build_avar_ambiguity: " + violations.front());

  AmbiguityModel out;
  for (int t = 0; t < inst.horizon; ++t) {
    SaRectModel stage;
    stage.sets.resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s) {
      stage.sets[s].reserve(inst.num_actions(t, s));
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        const Vec& ref = spec.reference_kernel.stages[t].rows[s][a];
        const int n = static_cast<int>(ref.size());
        Halfspaces hs;
        for (int i = 0; i < n; ++i) {
          Vec up(n, 0.0), down(n, 0.0);
          up[i] = 1.0;
          down[i] = -1.0;
          hs.ineq_lhs.push_back(std::move(up));
          hs.ineq_rhs.push_back(ref[i] / spec.alpha);
          hs.ineq_lhs.push_back(std::move(down));
          hs.ineq_rhs.push_back(0.0);
        }
        hs.eq_lhs.push_back(Vec(n, 1.0));
        hs.eq_rhs.push_back(1.0);
        stage.sets[s].push_back(Polytope::from_halfspaces(n, std::move(hs)));
      }
    }
    out.stages.push_back(std::move(stage));
  }
  return out;
}

NestedRiskSolution solve_nested_risk(const MdpInstance& inst, const AvarSpec& spec) {
  auto violations = validate_avar_spec(spec, inst);
  if (!violations.empty()) throw ValidationError("solve_nested_risk: " + violations.front());

  NestedRiskSolution out;
  out.values.values.resize(inst.horizon + 1);
  out.values.values[inst.horizon] = inst.terminal_cost;
  out.policy.rows.resize(inst.horizon);
  for (int t = inst.horizon - 1; t >= 0; --t) {
    const Vec& v_next = out.values.values[t + 1];
    out.values.values[t].assign(inst.num_states(t), 0.0);
    out.policy.rows[t].resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s) {
      const int na = inst.num_actions(t, s);
      double best = kInf;
      int best_a = 0;
      for (int a = 0; a < na; ++a) {
        Vec z(inst.num_states(t + 1));
        for (int nx = 0; nx < inst.num_states(t + 1); ++nx)
          z[nx] = inst.cost[t][s][a][nx] + v_next[nx];
        const double v = avar_sorting(z, spec.reference_kernel.stages[t].rows[s][a], spec.alpha);
        if (v < best - 1e-15) {
          best = v;
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

std::vector<std::string> validate_soc_spec(const SocSpec& spec) {
  std::vector<std::string> out;
  if (spec.horizon < 1) out.push_back("soc: horizon must be >= 1");
  if (static_cast<int>(spec.states.size()) != spec.horizon + 1) {
    out.push_back("soc: states must list horizon+1 stages");
    return out;
  }
  if (static_cast<int>(spec.actions.size()) != spec.horizon ||
      static_cast<int>(spec.noise.size()) != spec.horizon ||
      static_cast<int>(spec.transition.size()) != spec.horizon ||
      static_cast<int>(spec.cost.size()) != spec.horizon ||
      static_cast<int>(spec.noise_ambiguity.size()) != spec.horizon) {
    out.push_back("soc: per-stage lists must have horizon entries");
    return out;
  }
  for (int t = 0; t < spec.horizon; ++t) {
    if (spec.actions[t].empty()) out.push_back("soc: empty action set at stage " + std::to_string(t + 1));
    if (spec.noise[t].empty()) out.push_back("soc: empty noise support at stage " + std::to_string(t + 1));
    if (static_cast<int>(spec.transition[t].size()) != spec.num_states(t)) {
      out.push_back("soc: transition table state count mismatch at stage " + std::to_string(t + 1));
      continue;
    }
    for (int s = 0; s < spec.num_states(t); ++s) {
      if (static_cast<int>(spec.transition[t][s].size()) != spec.num_actions(t)) {
        out.push_back("soc: transition table action count mismatch");
        continue;
      }
      for (int a = 0; a < spec.num_actions(t); ++a) {
        if (static_cast<int>(spec.transition[t][s][a].size()) != spec.num_noise(t)) {
          out.push_back("soc: transition table noise count mismatch");
          continue;
        }
        for (int xi = 0; xi < spec.num_noise(t); ++xi) {
          const int nxt = spec.transition[t][s][a][xi];
          if (nxt < 0 || nxt >= spec.num_states(t + 1))
            out.push_back("soc: image out of range at (" + std::to_string(t + 1) + ", " +
                          spec.states[t][s] + ", " + spec.actions[t][a] + ", " + spec.noise[t][xi] +
                          ")");
        }
      }
    }
    if (spec.noise_ambiguity[t].dim != spec.num_noise(t))
      out.push_back("soc: noise ambiguity dimension mismatch at stage " + std::to_string(t + 1));
    auto sub = spec.noise_ambiguity[t].validate();
    out.insert(out.end(), sub.begin(), sub.end());
    for (const Vec& q : spec.noise_ambiguity[t].vertices()) {
      double sum = 0.0;
      for (double v : q) {
        if (v < -kProbTol) out.push_back("soc: noise vertex below zero");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kProbTol) out.push_back("soc: noise vertex not a distribution");
    }
  }
  if (static_cast<int>(spec.terminal_cost.size()) != spec.num_states(spec.horizon))
    out.push_back("soc: terminal cost length mismatch");
  if (spec.initial_state < 0 || spec.initial_state >= spec.num_states(0))
    out.push_back("soc: initial state out of range");
  return out;
}

namespace {

StageKernel pushforward(const SocSpec& spec, int t, const Vec& q) {
  StageKernel k;
  const int ns = spec.num_states(t);
  const int na = spec.num_actions(t);
  const int nn = spec.num_states(t + 1);
  k.rows.resize(ns);
  for (int s = 0; s < ns; ++s) {
    k.rows[s].assign(na, Vec(nn, 0.0));
    for (int a = 0; a < na; ++a)
      for (int xi = 0; xi < spec.num_noise(t); ++xi)
        k.rows[s][a][spec.transition[t][s][a][xi]] += q[xi];
  }
  return k;
}

}  // namespace

SocInduced build_soc_ambiguity(const SocSpec& spec) {
  auto violations = validate_soc_spec(spec);
  if (!violations.empty()) throw ValidationError("build_soc_ambiguity: " + violations.front());

  SocInduced out;
  out.instance.horizon = spec.horizon;
  out.instance.states = spec.states;
  out.instance.terminal_cost = spec.terminal_cost;
  out.instance.initial_state = spec.initial_state;
  out.instance.actions.resize(spec.horizon);
  out.instance.cost.resize(spec.horizon);
  out.cost_reduction_ok = true;
  for (int t = 0; t < spec.horizon; ++t) {
    const int ns = spec.num_states(t);
    const int na = spec.num_actions(t);
    const int nn = spec.num_states(t + 1);
    out.instance.actions[t].assign(ns, spec.actions[t]);
    out.instance.cost[t].assign(ns, std::vector<Vec>(na, Vec(nn, 0.0)));
    for (int s = 0; s < ns && out.cost_reduction_ok; ++s)
      for (int a = 0; a < na && out.cost_reduction_ok; ++a) {
        std::vector<bool> seen(nn, false);
        for (int xi = 0; xi < spec.num_noise(t); ++xi) {
          const int nxt = spec.transition[t][s][a][xi];
          const double c = spec.cost[t][s][a][xi];
          if (!seen[nxt]) {
            seen[nxt] = true;
            out.instance.cost[t][s][a][nxt] = c;
          } else if (std::abs(out.instance.cost[t][s][a][nxt] - c) > 1e-12) {
            out.cost_reduction_ok = false;
            out.note = "cost reduction refused: noise points " + spec.states[t][s] + "/" +
                       spec.actions[t][a] + " share an image with different costs; solve in "
                       "noise space instead";
          }
        }
      }
  }
  if (!out.cost_reduction_ok) {
    for (auto& per_t : out.instance.cost)
      for (auto& per_s : per_t)
        for (auto& row : per_s) std::fill(row.begin(), row.end(), 0.0);
  } else {
    out.note = "kernel reduction carries the costs exactly";
  }

  for (int t = 0; t < spec.horizon; ++t) {
    const Matrix verts = spec.noise_ambiguity[t].vertices();
    if (verts.size() == 1) {
      out.ambiguity.stages.push_back(SingletonModel{pushforward(spec, t, verts[0])});
    } else {
      FiniteKernelSetModel m;
      m.convex_hull = true;
      for (const Vec& q : verts) m.kernels.push_back(pushforward(spec, t, q));
      out.ambiguity.stages.push_back(std::move(m));
    }
  }
  return out;
}

SocSolution solve_soc(const SocSpec& spec) {
  auto violations = validate_soc_spec(spec);
  if (!violations.empty()) throw ValidationError("solve_soc: " + violations.front());

  SocSolution out;
  out.values.values.resize(spec.horizon + 1);
  out.values.values[spec.horizon] = spec.terminal_cost;
  out.policy.rows.resize(spec.horizon);
  for (int t = spec.horizon - 1; t >= 0; --t) {
    const Vec& v_next = out.values.values[t + 1];
    const Matrix verts = spec.noise_ambiguity[t].vertices();
    out.values.values[t].assign(spec.num_states(t), 0.0);
    out.policy.rows[t].resize(spec.num_states(t));
    for (int s = 0; s < spec.num_states(t); ++s) {
      const int na = spec.num_actions(t);
      Matrix piece;
      piece.reserve(verts.size());
      for (const Vec& q : verts) {
        Vec w(na, 0.0);
        for (int a = 0; a < na; ++a) {
          double acc = 0.0;
          for (int xi = 0; xi < spec.num_noise(t); ++xi)
            acc += q[xi] * (spec.cost[t][s][a][xi] + v_next[spec.transition[t][s][a][xi]]);
          w[a] = acc;
        }
        piece.push_back(std::move(w));
      }
      MinmaxResult res = minmax_over_union({piece}, na);
      out.values.values[t][s] = res.primal.value;
      out.policy.rows[t][s] = res.primal.minimizer;
    }
  }
  return out;
}

SocProbeReport soc_rectangularity_probe(const SocSpec& spec) {
  SocProbeReport rep;
  SocInduced induced = build_soc_ambiguity(spec);

  for (int t = 0; t < spec.horizon; ++t) {
    // Applicability: all images distinct across (s, a, xi) and > 1 vertex.
    std::map<int, int> image_count;
    bool distinct = true;
    for (int s = 0; s < spec.num_states(t) && distinct; ++s)
      for (int a = 0; a < spec.num_actions(t) && distinct; ++a)
        for (int xi = 0; xi < spec.num_noise(t) && distinct; ++xi)
          if (++image_count[spec.transition[t][s][a][xi]] > 1) distinct = false;
    const Matrix verts = spec.noise_ambiguity[t].vertices();
    if (!distinct || verts.size() < 2) continue;

    rep.applicable = true;
    rep.stage = t;
    rep.product = s_product_membership_probe(induced.ambiguity.stages[t], induced.instance, t);
    rep.not_s_rectangular = rep.product.conclusive && !rep.product.product_contained;
    rep.note = rep.not_s_rectangular
                   ? "induced set is not s-rectangular: product recombination leaves the set"
                   : "probe inconclusive";
    return rep;
  }
  rep.note = "precondition unmet (images collide or the noise set is a singleton)";
  return rep;
}

}  // namespace drmdp
