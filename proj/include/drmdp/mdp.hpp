#ifndef DRMDP_MDP_HPP
#define DRMDP_MDP_HPP

#include <string>
#include <vector>

#include "drmdp/common.hpp"

namespace drmdp {

// Finite-horizon MDP with stage-indexed state spaces. Decision stages are
// 0..horizon-1 (stage t here corresponds to stage t+1 in one-based notation);
// states[horizon] is the terminal stage. States and actions carry stable
// string names and are addressed by dense indices everywhere else.
struct MdpInstance {
  int horizon = 0;
  std::vector<std::vector<std::string>> states;                // [t], t = 0..horizon
  std::vector<std::vector<std::vector<std::string>>> actions;  // [t][s], t = 0..horizon-1
  // cost[t][s][a][s'] and terminal_cost[s'].
  std::vector<std::vector<std::vector<Vec>>> cost;
  Vec terminal_cost;
  int initial_state = 0;

  int num_states(int t) const { return static_cast<int>(states[t].size()); }
  int num_actions(int t, int s) const { return static_cast<int>(actions[t][s].size()); }
  int state_index(int t, const std::string& name) const;
  double max_abs_cost() const;
};

// Human-readable invariant violations; empty means well-formed.
std::vector<std::string> validate_instance(const MdpInstance& inst);

// One stage of a transition kernel: rows[s][a] is the distribution of the
// next state given (s, a).
struct StageKernel {
  std::vector<std::vector<Vec>> rows;
};

struct Kernel {
  std::vector<StageKernel> stages;  // size horizon
};

std::vector<std::string> validate_kernel(const MdpInstance& inst, const Kernel& kernel);

// rows[t][s] is a distribution over the actions available at (t, s).
struct RandomizedPolicy {
  std::vector<std::vector<Vec>> rows;
};

std::vector<std::string> validate_policy(const MdpInstance& inst, const RandomizedPolicy& policy);

// A policy is deterministic when every row puts mass >= 1 - kProbTol on one action.
bool is_deterministic(const RandomizedPolicy& policy);

RandomizedPolicy uniform_policy(const MdpInstance& inst);
RandomizedPolicy deterministic_policy(const MdpInstance& inst,
                                      const std::vector<std::vector<int>>& action_choice);

// Clamps tiny negatives and rescales rows whose sum is within tol of 1.
// Throws ValidationError when a row is off by more than tol.
void normalize_distribution(Vec& row, double tol = kProbTol);

// values[t][s] for t = 0..horizon; row `horizon` always equals terminal_cost.
struct ValueTable {
  std::vector<Vec> values;
  double at_initial(const MdpInstance& inst) const { return values[0][inst.initial_state]; }
};

// Risk-neutral policy evaluation under a fixed kernel sequence:
// V[t][s] = sum_{a,s'} pi(a|s) P(s'|s,a) (c_t(s,a,s') + V[t+1][s']).
ValueTable evaluate_policy(const MdpInstance& inst, const RandomizedPolicy& policy,
                           const Kernel& kernel);

struct NominalSolution {
  ValueTable values;
  RandomizedPolicy policy;  // deterministic; ties broken by lowest action index
};

// Backward induction with a fixed (singleton) kernel.
NominalSolution solve_nominal(const MdpInstance& inst, const Kernel& kernel);

}  // namespace drmdp

#endif  // DRMDP_MDP_HPP
