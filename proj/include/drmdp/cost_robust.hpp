#ifndef DRMDP_COST_ROBUST_HPP
#define DRMDP_COST_ROBUST_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "drmdp/mdp.hpp"
#include "drmdp/polytope.hpp"
#include "drmdp/robust_dp.hpp"

namespace drmdp {

// Cost-robust MDPs: the kernel is fixed, nature picks the stage cost tables
// from structured sets. Same game machinery with the roles of kernels and
// costs swapped, plus the support-function reduction to a regularized
// non-robust MDP.

struct StageCostTable {
  std::vector<std::vector<Vec>> entries;  // [s][a][s']
};

// Independent cost polytope per (state, action), over R^{|S_{t+1}|}.
struct CostSaRectModel {
  std::vector<std::vector<Polytope>> sets;
};

// Per-state set in the joint (action, next-state) space.
struct CostSRectModel {
  std::vector<UnionOfPolytopes> sets;
};

struct FiniteCostSetModel {
  std::vector<StageCostTable> tables;
};

struct CostSingletonModel {
  StageCostTable table;
};

using StageCostModel =
    std::variant<CostSaRectModel, CostSRectModel, FiniteCostSetModel, CostSingletonModel>;

struct CostAmbiguityModel {
  std::vector<StageCostModel> stages;
};

// Structural and boundedness checks. Halfspace cost polytopes are rejected
// unless bounded (probed by LP along +-each coordinate): the support function
// must stay real valued.
std::vector<std::string> validate_cost_model(const StageCostModel& model, const MdpInstance& inst,
                                             int t, std::int64_t cap = kDefaultEnumCap);
std::vector<std::string> validate_cost_ambiguity(const CostAmbiguityModel& model,
                                                 const MdpInstance& inst,
                                                 std::int64_t cap = kDefaultEnumCap);

// Vertex pieces of the state-wise cost marginal at (t, s), flat joint layout.
std::vector<Matrix> cost_marginal_pieces(const StageCostModel& model, const MdpInstance& inst,
                                         int t, int s, std::int64_t cap = kDefaultEnumCap);

struct CostRobustSolution {
  ValueTable values;
  RandomizedPolicy policy;
  std::vector<std::vector<Vec>> nature_cost;  // [t][s] joint cost point
  std::vector<std::vector<int>> dual_piece;
  std::vector<std::vector<int>> dual_response_action;
};

CostRobustSolution solve_primal_cost(const MdpInstance& inst, const Kernel& kernel,
                                     const CostAmbiguityModel& ambiguity);
CostRobustSolution solve_dual_cost(const MdpInstance& inst, const Kernel& kernel,
                                   const CostAmbiguityModel& ambiguity);

// h_s(x) = sup over the stage cost set of sum_a x(a) sum_s' P(s'|s,a) c(s,a,s').
// Convex and positively homogeneous in x; x need not be a distribution.
double support_function_h(const MdpInstance& inst, const Kernel& kernel,
                          const CostAmbiguityModel& ambiguity, int t, int s, const Vec& x);

// The equivalent regularized MDP: V_t(s) = min_{pi} { h_s(pi) + E[V_{t+1}] },
// one LP per (t, s). Must agree with solve_primal_cost to 1e-8.
ValueTable solve_via_regularization(const MdpInstance& inst, const Kernel& kernel,
                                    const CostAmbiguityModel& ambiguity);

StageAssumptionReport check_shared_worst_cost(const MdpInstance& inst, const Kernel& kernel,
                                           const StageCostModel& model, int t, const Vec& v_next,
                                           std::int64_t cap = kDefaultEnumCap);
AssumptionSummary check_shared_worst_cost_all(const MdpInstance& inst, const Kernel& kernel,
                                           const CostAmbiguityModel& ambiguity,
                                           const ValueTable& primal_values,
                                           std::int64_t cap = kDefaultEnumCap);

bool check_convex_cost_marginal(const MdpInstance& inst, const StageCostModel& model, int t, int s,
                                std::int64_t cap = kDefaultEnumCap);

struct CostStaticReport {
  double static_primal = 0.0;   // grid policies, exact per-stage inner sup
  double static_dual_lb = 0.0;  // sampled cost tables, exact inner minimization
  double game_primal = 0.0;
  double game_dual = 0.0;
  double primal_tolerance = 0.0;
  bool certified = false;
  bool four_way_equal = false;  // asserted under certification
  std::string note;
};

// Static counterparts of the cost-robust game. The total cost is affine in
// each stage's cost table, so the static primal's inner sup decomposes across
// stages and vertex enumeration is exact.
CostStaticReport static_cost_oracle(const MdpInstance& inst, const Kernel& kernel,
                                    const CostAmbiguityModel& ambiguity, int policy_grid_resolution,
                                    std::int64_t cap = kDefaultEnumCap);

}  // namespace drmdp

#endif  // DRMDP_COST_ROBUST_HPP
