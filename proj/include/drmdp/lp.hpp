#ifndef DRMDP_LP_HPP
#define DRMDP_LP_HPP

#include <vector>

#include "drmdp/common.hpp"

namespace drmdp {

// Dense linear program: minimize objective.x subject to
//   ineq_lhs[i].x <= ineq_rhs[i], eq_lhs[j].x == eq_rhs[j],
//   lower[k] <= x[k] <= upper[k]  (+-inf allowed).
// If lower/upper are empty they default to 0 / +inf.
struct LinearProgram {
  Vec objective;
  Matrix ineq_lhs;
  Vec ineq_rhs;
  Matrix eq_lhs;
  Vec eq_rhs;
  Vec lower;
  Vec upper;

  int num_vars() const { return static_cast<int>(objective.size()); }
  void add_ineq(Vec row, double rhs) {
    ineq_lhs.push_back(std::move(row));
    ineq_rhs.push_back(rhs);
  }
  void add_eq(Vec row, double rhs) {
    eq_lhs.push_back(std::move(row));
    eq_rhs.push_back(rhs);
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Degenerate };

struct LpSolution {
  LpStatus status = LpStatus::Degenerate;
  Vec x;
  double value = 0.0;
  bool ok() const { return status == LpStatus::Optimal; }
};

// Two-phase dense simplex. Dantzig pricing with lowest-index tie break,
// switching to Bland's rule after 500 non-improving pivots. Deterministic for
// identical input. Pivots smaller than kPivotBreakdown yield Degenerate
// instead of a possibly wrong answer.
LpSolution solve_lp(const LinearProgram& lp);

// Saddle data for a bilinear game over simplices. `minimizer` is the row
// player's mixed strategy; `maximizer` weighs the columns (vertices) the
// maximizing player mixes over; `piece_index` names the union piece attaining
// the dual value where applicable.
struct GameSolution {
  double value = 0.0;
  Vec minimizer;
  Vec maximizer;
  bool is_saddle = false;
  int piece_index = 0;
};

// Value and optimal mixed strategies of min_{x in simplex} max_{y in simplex}
// x^T M y, with payoff[r][c] the cost to the row player. Solves the row and
// column LPs separately and cross-checks the values to 1e-8.
GameSolution solve_matrix_game(const Matrix& payoff);

struct MinmaxResult {
  GameSolution primal;  // min over action simplex, max over all vertices of all pieces
  GameSolution dual;    // max over pieces of the per-piece matrix game (nature commits)
};

// Per-(stage,state) subproblem shared by the robust solvers. pieces[p][v] is
// the cost column of vertex v of piece p: entry a = w(a, v). The primal pools
// every vertex (nature reacts after seeing the mixed action); the dual lets
// nature commit to a point of one piece's convex hull first. Weak duality
// dual <= primal holds by construction; is_saddle is set on both solutions
// when the two values agree to kSaddleTol.
MinmaxResult minmax_over_union(const std::vector<Matrix>& pieces, int action_count);

// L1 distance from `point` to conv(vertices), via LP. Membership test helper.
double hull_l1_distance(const Vec& point, const Matrix& vertices);
bool in_hull(const Vec& point, const Matrix& vertices, double tol = kMembershipTol);

}  // namespace drmdp

#endif  // DRMDP_LP_HPP
