#ifndef DRMDP_ROBUST_DP_HPP
#define DRMDP_ROBUST_DP_HPP

#include <optional>
#include <string>
#include <vector>

#include "drmdp/ambiguity.hpp"
#include "drmdp/mdp.hpp"

namespace drmdp {

// Backward-induction engine for the game formulation. The primal recursion
// is V_t(s) = min_{pi in simplex} max_{P in set} E[c + V_{t+1}]; the dual
// swaps min and max (nature commits per state). Per-(t,s) subproblems reduce
// to bilinear games over the state-wise marginal of the ambiguity set.

struct RobustSolution {
  ValueTable values;
  RandomizedPolicy policy;  // LP minimizers (primal) or per-state best responses (dual)
  // Per (t, s): nature's choice in the flat joint space. For the primal this
  // is an extreme point (best response to the optimal mixed action); for the
  // dual it is the committed maximizer, possibly interior.
  std::vector<std::vector<Vec>> nature_joint;
  std::vector<std::vector<int>> dual_piece;            // winning union piece (dual only)
  std::vector<std::vector<int>> dual_response_action;  // controller pure response (dual only)
};

RobustSolution solve_primal(const MdpInstance& inst, const AmbiguityModel& ambiguity);
RobustSolution solve_dual(const MdpInstance& inst, const AmbiguityModel& ambiguity);

// Worst-case evaluation of a fixed policy: max over the stage sets of the
// expected cost-to-go (nature reacts per state).
ValueTable evaluate_policy_robust(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                  const RandomizedPolicy& policy);

enum class AssumptionVerdict { Fails, HoldsAOnly, HoldsB };

const char* verdict_name(AssumptionVerdict v);

// One stage's verdict for the shared-worst-kernel condition: HoldsB when a
// single kernel attains every per-(state,action) maximum of E[c + V_next],
// HoldsAOnly when each state has its own such kernel, Fails otherwise.
// Checked on pure actions only (sufficient by convexity).
struct StageAssumptionReport {
  AssumptionVerdict verdict = AssumptionVerdict::Fails;
  std::optional<StageKernel> witness;              // the shared kernel when HoldsB
  std::vector<std::optional<Vec>> state_witness;   // per state, joint point when it has one
  std::string note;
};

StageAssumptionReport check_shared_worst_kernel(const MdpInstance& inst, const StageModel& model, int t,
                                           const Vec& v_next, std::int64_t cap = kDefaultEnumCap);

struct AssumptionSummary {
  AssumptionVerdict verdict = AssumptionVerdict::Fails;
  std::vector<StageAssumptionReport> stages;
};

// Runs the per-stage check against the primal continuation values.
AssumptionSummary check_shared_worst_kernel_all(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                                           const ValueTable& primal_values,
                                           std::int64_t cap = kDefaultEnumCap);

// True iff the state-wise marginal at (t, s) is convex: a single declared
// piece, or all midpoints of pooled vertices are members of some piece.
bool check_convex_marginal(const MdpInstance& inst, const StageModel& model, int t, int s,
                           std::int64_t cap = kDefaultEnumCap);

struct RobustSolveReport {
  ValueTable primal_values;
  ValueTable dual_values;
  RandomizedPolicy controller_policy;
  std::vector<std::vector<Vec>> nature_primal_response;  // extreme point per (t, s)
  std::vector<std::vector<Vec>> nature_dual_policy;      // committed maximizer per (t, s)
  double gap = 0.0;                                      // V_1(s_1) - Q_1(s_1)
  std::vector<std::vector<bool>> per_state_saddle;       // |V - Q| <= kSaddleTol at (t, s)
  AssumptionSummary assumption;
  std::vector<std::vector<bool>> convex_marginal;
  bool convex_marginal_all = false;
  // Pure-action extraction: det_policy[t][s] minimizes the worst case over
  // pure actions; det_policy_exists iff that matches V everywhere.
  std::vector<std::vector<int>> det_policy;
  bool det_policy_exists = false;
  // Theorem-level implications, checked rather than assumed.
  bool assumption_implies_no_gap_checked = false;
  bool assumption_implies_no_gap_ok = true;
  bool convexity_implies_saddle_checked = false;
  bool convexity_implies_saddle_ok = true;
  std::string remark;
};

RobustSolveReport diagnose(const MdpInstance& inst, const AmbiguityModel& ambiguity,
                           std::int64_t cap = kDefaultEnumCap);

}  // namespace drmdp

#endif  // DRMDP_ROBUST_DP_HPP
