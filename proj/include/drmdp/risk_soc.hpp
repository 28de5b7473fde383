#ifndef DRMDP_RISK_SOC_HPP
#define DRMDP_RISK_SOC_HPP

#include <optional>
#include <string>
#include <vector>

#include "drmdp/ambiguity.hpp"
#include "drmdp/mdp.hpp"

namespace drmdp {

// Average value-at-risk of the cost vector `values` under `probabilities`:
// inf_tau { tau + E[(Z - tau)_+] / alpha }. Computed by the sorted-quantile
// closed form and cross-checked against the dual LP
// max { q.Z : 0 <= q <= p/alpha, sum q = 1 } to 1e-9.
double avar(const Vec& values, const Vec& probabilities, double alpha);
double avar_sorting(const Vec& values, const Vec& probabilities, double alpha);
double avar_lp(const Vec& values, const Vec& probabilities, double alpha);

struct AvarSpec {
  double alpha = 1.0;  // in (0, 1]
  Kernel reference_kernel;
};

std::vector<std::string> validate_avar_spec(const AvarSpec& spec, const MdpInstance& inst);

// The induced (s,a)-rectangular model: per (s,a) the halfspace polytope
// { q : 0 <= q <= reference/alpha, sum q = 1 }. Coordinates with zero
// reference probability are forced to zero in every member.
AmbiguityModel build_avar_ambiguity(const AvarSpec& spec, const MdpInstance& inst);

struct NestedRiskSolution {
  ValueTable values;
  RandomizedPolicy policy;  // deterministic, ties to the lowest action index
};

// Nested risk-averse recursion: V_t(s) = min_a AV@R(c_t(s,a,.) + V_{t+1}).
// Agrees with the robust solve on build_avar_ambiguity's model.
NestedRiskSolution solve_nested_risk(const MdpInstance& inst, const AvarSpec& spec);

// Stochastic optimal control skeleton: state equation s' = F_t(s, a, xi) with
// stage costs on (s, a, xi) and an ambiguity set of noise distributions per
// stage. Action sets do not depend on the state.
struct SocSpec {
  int horizon = 0;
  std::vector<std::vector<std::string>> states;  // size horizon+1
  std::vector<std::vector<std::string>> actions; // [t]
  std::vector<std::vector<std::string>> noise;   // [t]
  std::vector<std::vector<std::vector<std::vector<int>>>> transition;  // [t][s][a][xi] -> s'
  std::vector<std::vector<std::vector<Vec>>> cost;                     // [t][s][a][xi]
  std::vector<Polytope> noise_ambiguity;                               // [t], over the noise simplex
  Vec terminal_cost;
  int initial_state = 0;

  int num_states(int t) const { return static_cast<int>(states[t].size()); }
  int num_actions(int t) const { return static_cast<int>(actions[t].size()); }
  int num_noise(int t) const { return static_cast<int>(noise[t].size()); }
};

std::vector<std::string> validate_soc_spec(const SocSpec& spec);

struct SocInduced {
  // When the pushforward meets two noise points with the same (s, a, s') but
  // different costs, the kernel reduction cannot carry the costs and the
  // induced instance is unusable for solving (solve in noise space instead).
  bool cost_reduction_ok = false;
  MdpInstance instance;
  AmbiguityModel ambiguity;  // per stage: Singleton, or the hull of the vertex-image kernels
  std::string note;
};

// Pushes the noise ambiguity through the state equation: the map Q -> P^Q is
// linear, so the vertex images span the induced polytope of kernels. The
// induced set couples all (s, a) through the shared Q.
SocInduced build_soc_ambiguity(const SocSpec& spec);

struct SocSolution {
  ValueTable values;  // over the SOC state spaces
  RandomizedPolicy policy;
};

// Solves directly in noise space: per (t, s) a bilinear game between the
// action simplex and the noise ambiguity set. Always sound, no reduction.
SocSolution solve_soc(const SocSpec& spec);

struct SocProbeReport {
  bool applicable = false;       // distinct images and a non-singleton noise set
  bool not_s_rectangular = false;
  ProductProbeReport product;
  int stage = -1;
  std::string note;
};

// When the images F_t(s,a,xi) are all distinct and the noise set has more
// than one vertex, the induced kernel set cannot be s-rectangular: some
// product combination of state-wise marginal vertices falls outside it. The
// witness is certified by an LP membership failure.
SocProbeReport soc_rectangularity_probe(const SocSpec& spec);

}  // namespace drmdp

#endif  // DRMDP_RISK_SOC_HPP
