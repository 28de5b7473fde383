#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drmdp/cost_robust.hpp"
#include "drmdp/fixtures.hpp"
#include "test_common.hpp"

using namespace drmdp;

namespace {

CostAmbiguityModel singleton_cost(const MdpInstance& inst) {
  CostAmbiguityModel model;
  for (int t = 0; t < inst.horizon; ++t) {
    StageCostTable tbl;
    tbl.entries = inst.cost[t];
    model.stages.push_back(CostSingletonModel{std::move(tbl)});
  }
  return model;
}

// Random finite cost sets of whole tables around the instance costs.
CostAmbiguityModel random_finite_cost(testing::Rng& rng, const MdpInstance& inst, int count) {
  CostAmbiguityModel model;
  for (int t = 0; t < inst.horizon; ++t) {
    FiniteCostSetModel m;
    for (int k = 0; k < count; ++k) {
      StageCostTable tbl;
      tbl.entries = inst.cost[t];
      for (auto& per_s : tbl.entries)
        for (auto& row : per_s)
          for (double& c : row) c += rng.uniform(-0.5, 0.5);
      m.tables.push_back(std::move(tbl));
    }
    model.stages.push_back(std::move(m));
  }
  return model;
}

CostAmbiguityModel random_box_cost(testing::Rng& rng, const MdpInstance& inst) {
  CostAmbiguityModel model;
  for (int t = 0; t < inst.horizon; ++t) {
    CostSaRectModel m;
    m.sets.resize(inst.num_states(t));
    for (int s = 0; s < inst.num_states(t); ++s)
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        const int nn = inst.num_states(t + 1);
        Matrix verts;
        const double radius = rng.uniform(0.05, 0.5);
        // Box corners around the nominal cost row.
        for (int mask = 0; mask < (1 << nn); ++mask) {
          Vec v(nn);
          for (int d = 0; d < nn; ++d)
            v[d] = inst.cost[t][s][a][d] + ((mask >> d) & 1 ? radius : -radius);
          verts.push_back(std::move(v));
        }
        m.sets[s].push_back(Polytope::from_vertices(std::move(verts)));
      }
    model.stages.push_back(std::move(m));
  }
  return model;
}

}  // namespace

TEST_CASE("singleton cost set reduces to the nominal solve") {
  testing::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    MdpInstance inst = testing::random_instance(rng, {1, 3, 2}, 2);
    Kernel k = testing::random_kernel(rng, inst);
    NominalSolution nominal = solve_nominal(inst, k);
    CostRobustSolution robust = solve_primal_cost(inst, k, singleton_cost(inst));
    for (int t = 0; t <= inst.horizon; ++t)
      for (int s = 0; s < inst.num_states(t); ++s)
        CHECK(robust.values.values[t][s] ==
              doctest::Approx(nominal.values.values[t][s]).epsilon(1e-10));
  }
}

TEST_CASE("interval cost sets are solved at their upper endpoints") {
  Fixture fx = get_fixture("cost_interval");
  const MdpInstance& inst = fx.file.mdp;
  CostRobustSolution robust = solve_primal_cost(inst, *fx.file.kernel, *fx.file.cost_ambiguity);
  // Worst case is cost 1.5 under action 1 and 1.2 under action 2.
  CHECK(robust.values.values[0][0] == doctest::Approx(1.2).epsilon(1e-10));
  CHECK(robust.policy.rows[0][0][1] == doctest::Approx(1.0));
  // Against the upper-endpoint instance the values must agree.
  MdpInstance worst = inst;
  worst.cost[0][0][0] = {1.5, 1.5};
  worst.cost[0][0][1] = {1.2, 1.2};
  NominalSolution nominal = solve_nominal(worst, *fx.file.kernel);
  CHECK(robust.values.values[0][0] == doctest::Approx(nominal.values.values[0][0]).epsilon(1e-10));
}

TEST_CASE("a symmetric pair of cost tables forces a nonnegative value") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    MdpInstance inst = testing::random_instance(rng, {1, 2, 2}, 2);
    for (double& c : inst.terminal_cost) c = 0.0;
    Kernel k = testing::random_kernel(rng, inst);
    FiniteCostSetModel m;
    StageCostTable plus, minus;
    plus.entries = inst.cost[0];
    minus.entries = inst.cost[0];
    for (auto& per_s : minus.entries)
      for (auto& row : per_s)
        for (double& c : row) c = -c;
    m.tables = {plus, minus};
    CostAmbiguityModel model;
    model.stages.push_back(std::move(m));
    // Stage 2 keeps the nominal costs only.
    StageCostTable stage2;
    stage2.entries = inst.cost[1];
    for (auto& per_s : stage2.entries)
      for (auto& row : per_s)
        for (double& c : row) c = 0.0;
    model.stages.push_back(CostSingletonModel{std::move(stage2)});
    CostRobustSolution robust = solve_primal_cost(inst, k, model);
    CHECK(robust.values.values[0][0] >= -1e-9);
  }
}

TEST_CASE("support function properties") {
  Fixture fx = get_fixture("cost_interval");
  const MdpInstance& inst = fx.file.mdp;
  const Kernel& kernel = *fx.file.kernel;
  const CostAmbiguityModel& model = *fx.file.cost_ambiguity;

  SUBCASE("zero weight gives zero") {
    CHECK(support_function_h(inst, kernel, model, 0, 0, {0.0, 0.0}) == doctest::Approx(0.0));
  }
  SUBCASE("positive homogeneity") {
    testing::Rng rng(11);
    for (int i = 0; i < 50; ++i) {
      Vec x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
      const double lambda = rng.uniform(0.0, 3.0);
      Vec lx = {lambda * x[0], lambda * x[1]};
      const double hx = support_function_h(inst, kernel, model, 0, 0, x);
      const double hlx = support_function_h(inst, kernel, model, 0, 0, lx);
      CHECK(std::abs(hlx - lambda * hx) <= 1e-9 * (1.0 + std::abs(lambda * hx)));
    }
  }
  SUBCASE("convexity") {
    testing::Rng rng(13);
    for (int i = 0; i < 50; ++i) {
      Vec x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
      Vec y = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
      const double lam = rng.uniform(0.0, 1.0);
      Vec mix = {lam * x[0] + (1 - lam) * y[0], lam * x[1] + (1 - lam) * y[1]};
      const double lhs = support_function_h(inst, kernel, model, 0, 0, mix);
      const double rhs = lam * support_function_h(inst, kernel, model, 0, 0, x) +
                         (1 - lam) * support_function_h(inst, kernel, model, 0, 0, y);
      CHECK(lhs <= rhs + 1e-9);
    }
  }
  SUBCASE("a singleton cost set makes h linear") {
    CostAmbiguityModel single = singleton_cost(inst);
    Vec x = {0.7, -0.4};
    double expected = 0.0;
    for (int a = 0; a < 2; ++a) {
      double ec = 0.0;
      for (int nxt = 0; nxt < 2; ++nxt)
        ec += kernel.stages[0].rows[0][a][nxt] * inst.cost[0][0][a][nxt];
      expected += x[a] * ec;
    }
    CHECK(support_function_h(inst, kernel, single, 0, 0, x) == doctest::Approx(expected));
  }
}

TEST_CASE("regularized recursion agrees with the game recursion") {
  testing::Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    MdpInstance inst = testing::random_instance(rng, {1, 3, 2}, 2);
    Kernel k = testing::random_kernel(rng, inst);
    CostAmbiguityModel model = trial % 2 == 0 ? random_finite_cost(rng, inst, rng.uniform_int(2, 3))
                                              : random_box_cost(rng, inst);
    CostRobustSolution primal = solve_primal_cost(inst, k, model);
    ValueTable reg = solve_via_regularization(inst, k, model);
    for (int t = 0; t <= inst.horizon; ++t)
      for (int s = 0; s < inst.num_states(t); ++s)
        CHECK(std::abs(primal.values.values[t][s] - reg.values[t][s]) <= 1e-8);
  }
}

TEST_CASE("weak duality and the s,a-rectangular shared worst cost") {
  testing::Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    MdpInstance inst = testing::random_instance(rng, {1, 2, 2}, 2);
    Kernel k = testing::random_kernel(rng, inst);
    CostAmbiguityModel model = trial % 2 == 0 ? random_finite_cost(rng, inst, 2)
                                              : random_box_cost(rng, inst);
    CostRobustSolution primal = solve_primal_cost(inst, k, model);
    CostRobustSolution dual = solve_dual_cost(inst, k, model);
    for (int t = 0; t <= inst.horizon; ++t)
      for (int s = 0; s < inst.num_states(t); ++s)
        CHECK(dual.values.values[t][s] <= primal.values.values[t][s] + 1e-7);
    if (trial % 2 == 1) {
      AssumptionSummary sum = check_shared_worst_cost_all(inst, k, model, primal.values);
      CHECK(sum.verdict == AssumptionVerdict::HoldsB);
      CHECK(primal.values.at_initial(inst) - dual.values.at_initial(inst) <= 1e-6);
    }
  }
}

TEST_CASE("convex cost marginals certify the saddle") {
  testing::Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    MdpInstance inst = testing::random_instance(rng, {1, 2, 2}, 2);
    Kernel k = testing::random_kernel(rng, inst);
    CostAmbiguityModel model = random_box_cost(rng, inst);
    for (int t = 0; t < inst.horizon; ++t)
      for (int s = 0; s < inst.num_states(t); ++s)
        CHECK(check_convex_cost_marginal(inst, model.stages[t], t, s));
    CostRobustSolution primal = solve_primal_cost(inst, k, model);
    CostRobustSolution dual = solve_dual_cost(inst, k, model);
    CHECK(primal.values.at_initial(inst) - dual.values.at_initial(inst) <= 1e-6);
  }
  // A two-table finite set has a non-convex marginal unless the tables agree.
  MdpInstance inst = two_action_instance(1.0, 0.0);
  Kernel k;
  k.stages.push_back(StageKernel{{{{0.5, 0.5}, {0.5, 0.5}}}});
  testing::Rng rng2(29);
  CostAmbiguityModel model = random_finite_cost(rng2, inst, 2);
  CHECK(!check_convex_cost_marginal(inst, model.stages[0], 0, 0));
}

TEST_CASE("a convex per-state cost set closes the gap") {
  testing::Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    MdpInstance inst = testing::random_instance(rng, {1, 2, 2}, 2);
    Kernel k = testing::random_kernel(rng, inst);
    CostAmbiguityModel model;
    for (int t = 0; t < inst.horizon; ++t) {
      CostSRectModel m;
      m.sets.resize(inst.num_states(t));
      for (int s = 0; s < inst.num_states(t); ++s) {
        const int dim = inst.num_actions(t, s) * inst.num_states(t + 1);
        Matrix verts;
        for (int v = 0; v < 3; ++v) {
          Vec point(dim);
          for (double& x : point) x = rng.uniform(-1.0, 1.0);
          verts.push_back(std::move(point));
        }
        m.sets[s].pieces.push_back(Polytope::from_vertices(std::move(verts)));
      }
      model.stages.push_back(std::move(m));
    }
    CostRobustSolution primal = solve_primal_cost(inst, k, model);
    CostRobustSolution dual = solve_dual_cost(inst, k, model);
    for (int t = 0; t <= inst.horizon; ++t)
      for (int s = 0; s < inst.num_states(t); ++s)
        CHECK(std::abs(primal.values.values[t][s] - dual.values.values[t][s]) <= 1e-6);
  }
}

TEST_CASE("static cost oracle: four values coincide under certification") {
  SUBCASE("singleton") {
    testing::Rng rng(31);
    MdpInstance inst = testing::random_instance(rng, {1, 2, 2}, 2);
    Kernel k = testing::random_kernel(rng, inst);
    CostStaticReport rep = static_cost_oracle(inst, k, singleton_cost(inst), 8);
    CHECK(rep.certified);
    CHECK(rep.four_way_equal);
  }
  SUBCASE("box cost sets") {
    testing::Rng rng(37);
    MdpInstance inst = testing::random_instance(rng, {1, 2}, 2);
    Kernel k = testing::random_kernel(rng, inst);
    CostStaticReport rep = static_cost_oracle(inst, k, random_box_cost(rng, inst), 40);
    CHECK(rep.certified);
    CHECK(rep.four_way_equal);
  }
}

TEST_CASE("unbounded halfspace cost sets are rejected") {
  MdpInstance inst = two_action_instance(1.0, 0.0);
  Halfspaces hs;
  hs.ineq_lhs = {{1.0, 0.0}, {0.0, 1.0}};  // upper bounds only: unbounded below
  hs.ineq_rhs = {2.0, 2.0};
  CostSaRectModel m;
  m.sets = {{Polytope::from_halfspaces(2, hs), Polytope::from_halfspaces(2, hs)}};
  CostAmbiguityModel model;
  model.stages.push_back(std::move(m));
  auto violations = validate_cost_ambiguity(model, inst);
  REQUIRE(!violations.empty());
  CHECK(violations.front().find("unbounded") != std::string::npos);
}
