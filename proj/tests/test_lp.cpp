#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drmdp/lp.hpp"
#include "test_common.hpp"

using namespace drmdp;

TEST_CASE("bounded one-variable problems") {
  LinearProgram lp;
  lp.objective = {-1.0};
  lp.add_ineq({1.0}, 1.0);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.ok());
  CHECK(sol.value == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("infeasible system detected") {
  LinearProgram lp;
  lp.objective = {0.0};
  lp.add_ineq({1.0}, -1.0);  // x <= -1 with x >= 0
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded objective detected") {
  LinearProgram lp;
  lp.objective = {-1.0};  // min -x, x >= 0, no upper limit
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("simplex facet optimum") {
  LinearProgram lp;
  lp.objective = {-1.0, -1.0};
  lp.add_ineq({1.0, 1.0}, 1.0);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.ok());
  CHECK(sol.value == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("equality constraints and free variables") {
  // min x + y s.t. x + y = 2, x - y <= 0, y free.
  LinearProgram lp;
  lp.objective = {1.0, 1.0};
  lp.lower = {0.0, -kInf};
  lp.upper = {kInf, kInf};
  lp.add_eq({1.0, 1.0}, 2.0);
  lp.add_ineq({1.0, -1.0}, 0.0);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.ok());
  CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("optimal point survives random feasible perturbations") {
  // min -2x - 3y s.t. x + y <= 4, x + 3y <= 6, bounds [0, 3].
  LinearProgram lp;
  lp.objective = {-2.0, -3.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {3.0, 3.0};
  lp.add_ineq({1.0, 1.0}, 4.0);
  lp.add_ineq({1.0, 3.0}, 6.0);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.ok());

  testing::Rng rng(7);
  int feasible_count = 0;
  for (int i = 0; i < 100 || feasible_count < 100; ++i) {
    const double x = rng.uniform(0.0, 3.0);
    const double y = rng.uniform(0.0, 3.0);
    if (x + y > 4.0 || x + 3.0 * y > 6.0) continue;
    ++feasible_count;
    CHECK(-2.0 * x - 3.0 * y >= sol.value - 1e-9);
    if (i > 100000) break;
  }
}

TEST_CASE("deterministic output for identical input") {
  LinearProgram lp;
  lp.objective = {1.0, -2.0, 0.5};
  lp.add_ineq({1.0, 1.0, 1.0}, 2.0);
  lp.add_ineq({-1.0, 2.0, 0.0}, 1.0);
  lp.add_eq({0.0, 1.0, 1.0}, 1.0);
  LpSolution a = solve_lp(lp);
  LpSolution b = solve_lp(lp);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.value == b.value);
  CHECK(a.x == b.x);
}

TEST_CASE("rock paper scissors is fair") {
  const Matrix rps = {{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}};
  GameSolution g = solve_matrix_game(rps);
  CHECK(std::abs(g.value) <= 1e-9);
  for (int i = 0; i < 3; ++i) {
    CHECK(g.minimizer[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(g.maximizer[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  }
  CHECK(g.is_saddle);
}

TEST_CASE("one-by-one game") {
  GameSolution g = solve_matrix_game({{1.0}});
  CHECK(g.value == doctest::Approx(1.0));
}

TEST_CASE("two-by-two closed form") {
  // value = (ad - bc) / (a + d - b - c) for a mixed saddle.
  GameSolution g = solve_matrix_game({{1.0, 0.0}, {0.0, 1.0}});
  CHECK(g.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(g.minimizer[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(g.maximizer[0] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("random matrix games: minmax equals maxmin") {
  testing::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = rng.uniform_int(1, 4);
    const int k = rng.uniform_int(1, 4);
    Matrix payoff(m, Vec(k));
    for (auto& row : payoff)
      for (double& v : row) v = rng.uniform(-5.0, 5.0);
    // solve_matrix_game cross-checks the two LP values to 1e-8 internally.
    GameSolution g = solve_matrix_game(payoff);
    CHECK(g.is_saddle);
    double best_response = -kInf;
    for (int j = 0; j < k; ++j) {
      double col = 0.0;
      for (int i = 0; i < m; ++i) col += g.minimizer[i] * payoff[i][j];
      best_response = std::max(best_response, col);
    }
    CHECK(best_response <= g.value + 1e-7);
  }
}

TEST_CASE("minmax_over_union: single vertex piece degenerates to a pure minimum") {
  MinmaxResult res = minmax_over_union({{{3.0, 1.0, 2.0}}}, 3);
  CHECK(res.primal.value == doctest::Approx(1.0));
  CHECK(res.dual.value == doctest::Approx(1.0));
  CHECK(res.primal.is_saddle);
}

TEST_CASE("minmax_over_union: mirrored-segment stage subproblem with a hole") {
  // Vertices p in {0, 1/4} and {3/4, 1}; w(left, p) = p, w(right, p) = 1 - p.
  auto column = [](double p) { return Vec{p, 1.0 - p}; };
  std::vector<Matrix> pieces = {{column(0.0), column(0.25)}, {column(0.75), column(1.0)}};
  MinmaxResult res = minmax_over_union(pieces, 2);
  CHECK(res.primal.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.dual.value == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(!res.primal.is_saddle);
}

TEST_CASE("minmax_over_union: full segment restores the saddle") {
  auto column = [](double p) { return Vec{p, 1.0 - p}; };
  std::vector<Matrix> pieces = {{column(0.0), column(1.0)}};
  MinmaxResult res = minmax_over_union(pieces, 2);
  CHECK(res.primal.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.dual.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.primal.minimizer[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(res.primal.is_saddle);
}

TEST_CASE("weak duality on random unions") {
  testing::Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const int actions = rng.uniform_int(1, 4);
    const int num_pieces = rng.uniform_int(1, 3);
    std::vector<Matrix> pieces(num_pieces);
    for (auto& piece : pieces) {
      const int verts = rng.uniform_int(1, 5);
      piece.resize(verts, Vec(actions));
      for (auto& v : piece)
        for (double& x : v) x = rng.uniform(-3.0, 3.0);
    }
    MinmaxResult res = minmax_over_union(pieces, actions);
    CHECK(res.dual.value <= res.primal.value + 1e-8);
    if (num_pieces == 1) CHECK(std::abs(res.primal.value - res.dual.value) <= 1e-7);
  }
}

TEST_CASE("matrix-game consistency of the union primal") {
  testing::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int actions = rng.uniform_int(1, 3);
    const int verts = rng.uniform_int(1, 5);
    Matrix piece(verts, Vec(actions));
    for (auto& v : piece)
      for (double& x : v) x = rng.uniform(-2.0, 2.0);
    Matrix payoff(actions, Vec(verts));
    for (int a = 0; a < actions; ++a)
      for (int v = 0; v < verts; ++v) payoff[a][v] = piece[v][a];
    MinmaxResult res = minmax_over_union({piece}, actions);
    GameSolution direct = solve_matrix_game(payoff);
    CHECK(std::abs(res.primal.value - direct.value) <= 1e-8);
  }
}

TEST_CASE("scale equivariance") {
  testing::Rng rng(43);
  std::vector<Matrix> pieces = {{{1.0, -0.5}, {0.25, 2.0}}, {{0.0, 1.0}}};
  MinmaxResult base = minmax_over_union(pieces, 2);
  const double lambda = 3.7;
  std::vector<Matrix> scaled = pieces;
  for (auto& piece : scaled)
    for (auto& v : piece)
      for (double& x : v) x *= lambda;
  MinmaxResult big = minmax_over_union(scaled, 2);
  CHECK(big.primal.value == doctest::Approx(lambda * base.primal.value).epsilon(1e-9));
  CHECK(big.dual.value == doctest::Approx(lambda * base.dual.value).epsilon(1e-9));
  // The minimizer's support is scale invariant.
  for (int a = 0; a < 2; ++a)
    CHECK((base.primal.minimizer[a] > 1e-9) == (big.primal.minimizer[a] > 1e-9));
  (void)rng;
}

TEST_CASE("hull membership distances") {
  Matrix square = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  CHECK(hull_l1_distance({0.5, 0.5}, square) <= 1e-9);
  CHECK(hull_l1_distance({1.5, 0.5}, square) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(in_hull({0.25, 0.75}, square));
  CHECK(!in_hull({-0.1, 0.5}, square));
}
