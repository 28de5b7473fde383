#ifndef DRMDP_TESTS_COMMON_HPP
#define DRMDP_TESTS_COMMON_HPP

#include <random>
#include <vector>

#include "drmdp/ambiguity.hpp"
#include "drmdp/mdp.hpp"

namespace drmdp::testing {

// Deterministic pseudo-random helpers shared by the suites.
class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  Vec simplex(int n) {
    Vec v(n);
    double sum = 0.0;
    for (double& x : v) {
      x = -std::log(uniform(1e-9, 1.0));
      sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
  }

  std::mt19937& gen() { return gen_; }

 private:
  std::mt19937 gen_;
};

// Random instance with the given shape; costs in [-1, 1].
inline MdpInstance random_instance(Rng& rng, const std::vector<int>& states_per_stage,
                                   int num_actions) {
  MdpInstance inst;
  inst.horizon = static_cast<int>(states_per_stage.size()) - 1;
  inst.states.resize(inst.horizon + 1);
  for (int t = 0; t <= inst.horizon; ++t)
    for (int s = 0; s < states_per_stage[t]; ++s)
      inst.states[t].push_back("s" + std::to_string(t) + "_" + std::to_string(s));
  inst.actions.resize(inst.horizon);
  inst.cost.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    inst.actions[t].resize(states_per_stage[t]);
    inst.cost[t].resize(states_per_stage[t]);
    for (int s = 0; s < states_per_stage[t]; ++s) {
      for (int a = 0; a < num_actions; ++a) inst.actions[t][s].push_back("a" + std::to_string(a));
      inst.cost[t][s].resize(num_actions);
      for (int a = 0; a < num_actions; ++a) {
        inst.cost[t][s][a].resize(states_per_stage[t + 1]);
        for (double& c : inst.cost[t][s][a]) c = rng.uniform(-1.0, 1.0);
      }
    }
  }
  inst.terminal_cost.resize(states_per_stage[inst.horizon]);
  for (double& c : inst.terminal_cost) c = rng.uniform(-1.0, 1.0);
  inst.initial_state = 0;
  return inst;
}

inline StageKernel random_stage_kernel(Rng& rng, const MdpInstance& inst, int t) {
  StageKernel k;
  k.rows.resize(inst.num_states(t));
  for (int s = 0; s < inst.num_states(t); ++s) {
    k.rows[s].resize(inst.num_actions(t, s));
    for (int a = 0; a < inst.num_actions(t, s); ++a)
      k.rows[s][a] = rng.simplex(inst.num_states(t + 1));
  }
  return k;
}

inline Kernel random_kernel(Rng& rng, const MdpInstance& inst) {
  Kernel k;
  for (int t = 0; t < inst.horizon; ++t) k.stages.push_back(random_stage_kernel(rng, inst, t));
  return k;
}

inline RandomizedPolicy random_policy(Rng& rng, const MdpInstance& inst) {
  RandomizedPolicy p;
  p.rows.resize(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    p.rows[t].resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s) p.rows[t][s] = rng.simplex(inst.num_actions(t, s));
  }
  return p;
}

inline AmbiguityModel random_finite_model(Rng& rng, const MdpInstance& inst, int kernels_per_stage,
                                          bool convex_hull = false) {
  AmbiguityModel model;
  for (int t = 0; t < inst.horizon; ++t) {
    FiniteKernelSetModel m;
    m.convex_hull = convex_hull;
    for (int k = 0; k < kernels_per_stage; ++k)
      m.kernels.push_back(random_stage_kernel(rng, inst, t));
    model.stages.push_back(std::move(m));
  }
  return model;
}

// Interval (s,a)-rectangular model over two next states: each row polytope is
// the segment p in [lo, hi] mapped to (p, 1-p). Requires two next states.
inline AmbiguityModel random_interval_sa_model(Rng& rng, const MdpInstance& inst) {
  AmbiguityModel model;
  for (int t = 0; t < inst.horizon; ++t) {
    SaRectModel m;
    m.sets.resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s)
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        const double lo = rng.uniform(0.0, 0.5);
        const double hi = lo + rng.uniform(0.1, 0.5);
        m.sets[s].push_back(Polytope::from_vertices({{lo, 1.0 - lo}, {hi, 1.0 - hi}}));
      }
    model.stages.push_back(std::move(m));
  }
  return model;
}

}  // namespace drmdp::testing

#endif  // DRMDP_TESTS_COMMON_HPP
