#ifndef DRMDP_STATIC_ORACLE_HPP
#define DRMDP_STATIC_ORACLE_HPP

#include <string>
#include <vector>

#include "drmdp/ambiguity.hpp"
#include "drmdp/mdp.hpp"
#include "drmdp/robust_dp.hpp"

namespace drmdp {

// Brute-force oracles for the static formulation, where nature fixes one
// kernel per stage before the process runs, plus exhaustive checks over
// history-dependent policy classes. Desk scale only.

struct OracleConfig {
  int policy_grid_resolution = 20;  // simplex grid denominator per policy row
  int kernel_grid_resolution = 8;   // convex-weight grid for dual sampling
  std::int64_t max_enumeration = kDefaultEnumCap;
};

struct StaticPrimalReport {
  double value = 0.0;  // grid minimum; >= true optimum, <= true + lipschitz_bound * grid_spacing
  RandomizedPolicy argmin_policy;
  std::vector<int> worst_kernel_index;  // per stage, extreme kernel attaining the inner sup
  double lipschitz_bound = 0.0;         // (T+1) * max |c|
  double grid_spacing = 0.0;
  std::int64_t policies_enumerated = 0;
  std::int64_t kernel_combos = 0;
};

// min over grid policies of the exact inner sup: for a fixed policy the total
// expected cost is multilinear in the stage kernels, so one extreme kernel
// per stage suffices for the supremum.
StaticPrimalReport static_primal(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                 const OracleConfig& config);

struct StaticDualReport {
  double value = -kInf;  // best sampled objective; a lower bound on the static dual
  Kernel argmax_kernels;
  std::int64_t samples = 0;
  std::string note;
};

// Samples member kernels per stage (extremes, convex-weight mixtures where
// mixing stays inside the set, and the shared-worst-kernel witness when one
// exists) and solves the inner minimization exactly by backward induction.
// The inner minimum is concave in the kernels, so vertex sampling alone would
// not suffice; the result is reported as a lower bound.
StaticDualReport static_dual(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                             const OracleConfig& config);

struct EquivalenceReport {
  double game_primal = 0.0;
  double game_dual = 0.0;
  double static_primal_value = 0.0;
  double static_dual_lb = 0.0;
  double primal_tolerance = 0.0;  // lipschitz bound * grid spacing + slack
  bool certified = false;         // game/static equivalence condition certified
  bool primal_equivalent = false; // asserted only when certified
  bool dual_consistent = false;   // static_dual_lb <= game_dual + kGapTol
  std::string note;
};

EquivalenceReport check_equivalence(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                    const OracleConfig& config);

struct EnlargementReport {
  bool primal_match = false;
  bool dual_match = false;
  double max_primal_diff = 0.0;
  double max_dual_diff = 0.0;
};

// Solves the game before and after replacing each stage set with its
// s-rectangular enlargement; the value tables must agree state by state.
EnlargementReport enlargement_invariance(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                         std::int64_t cap = kDefaultEnumCap);

struct HistoryCheckReport {
  double min_max_value = 0.0;  // deterministic history-dependent controller vs Markov nature
  double game_primal = 0.0;
  std::int64_t controller_policies = 0;
  std::int64_t nature_policies = 0;
  bool ge_game_primal = false;
  bool equality_asserted = false;
  bool matches_game = false;
  std::string note;
};

// Exhaustive min-max over deterministic history-dependent controller policies
// (histories record states, actions and nature's past kernel choices) against
// deterministic Markovian nature policies over the stage extreme kernels.
// Nature's history-dependent policies are not enumerated: they cannot change
// the value against a Markovian controller class.
HistoryCheckReport history_dependent_check(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                           const OracleConfig& config);

}  // namespace drmdp

#endif  // DRMDP_STATIC_ORACLE_HPP
