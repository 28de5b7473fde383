#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drmdp/fixtures.hpp"
#include "drmdp/risk_soc.hpp"
#include "drmdp/robust_dp.hpp"
#include "drmdp/static_oracle.hpp"
#include "test_common.hpp"

using namespace drmdp;

TEST_CASE("avar basics") {
  SUBCASE("alpha one is the expectation") {
    Vec z = {3.0, -1.0, 2.0};
    Vec p = {0.2, 0.5, 0.3};
    CHECK(avar(z, p, 1.0) == doctest::Approx(0.2 * 3.0 - 0.5 + 0.3 * 2.0).epsilon(1e-12));
  }
  SUBCASE("half the mass on the worst outcome") {
    CHECK(avar({1.0, 0.0}, {0.5, 0.5}, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constants are fixed points at every level") {
    for (double alpha : {0.1, 0.35, 0.7, 1.0})
      CHECK(avar({2.5, 2.5, 2.5}, {0.2, 0.3, 0.5}, alpha) == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("alpha zero is rejected") {
    CHECK_THROWS_AS(avar({1.0}, {1.0}, 0.0), ValidationError);
  }
}

TEST_CASE("sorting and dual forms agree on random inputs") {
  testing::Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.uniform_int(1, 6);
    Vec z(n);
    for (double& v : z) v = rng.uniform(-5.0, 5.0);
    Vec p = rng.simplex(n);
    const double alpha = rng.uniform(0.05, 1.0);
    CHECK(std::abs(avar_sorting(z, p, alpha) - avar_lp(z, p, alpha)) <= 1e-9);
  }
}

TEST_CASE("coherence axioms on random vectors") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.uniform_int(2, 5);
    Vec z(n), w(n);
    for (double& v : z) v = rng.uniform(-3.0, 3.0);
    Vec p = rng.simplex(n);
    const double alpha = rng.uniform(0.1, 1.0);

    // Monotonicity.
    for (int i = 0; i < n; ++i) w[i] = z[i] + rng.uniform(0.0, 2.0);
    CHECK(avar_sorting(z, p, alpha) <= avar_sorting(w, p, alpha) + 1e-9);
    // Translation.
    const double shift = rng.uniform(-2.0, 2.0);
    Vec shifted(n);
    for (int i = 0; i < n; ++i) shifted[i] = z[i] + shift;
    CHECK(std::abs(avar_sorting(shifted, p, alpha) - (avar_sorting(z, p, alpha) + shift)) <= 1e-9);
    // Positive homogeneity.
    const double lambda = rng.uniform(0.0, 3.0);
    Vec scaled(n);
    for (int i = 0; i < n; ++i) scaled[i] = lambda * z[i];
    CHECK(std::abs(avar_sorting(scaled, p, alpha) - lambda * avar_sorting(z, p, alpha)) <= 1e-9);
    // Convexity in the cost vector.
    Vec other(n);
    for (double& v : other) v = rng.uniform(-3.0, 3.0);
    const double lam = rng.uniform(0.0, 1.0);
    Vec mix(n);
    for (int i = 0; i < n; ++i) mix[i] = lam * z[i] + (1.0 - lam) * other[i];
    CHECK(avar_sorting(mix, p, alpha) <=
          lam * avar_sorting(z, p, alpha) + (1.0 - lam) * avar_sorting(other, p, alpha) + 1e-9);
  }
}

TEST_CASE("induced risk polytopes") {
  MdpInstance inst = two_action_instance(1.0, 0.0);
  Kernel ref;
  ref.stages.push_back(StageKernel{{{{0.5, 0.5}, {0.25, 0.75}}}});

  SUBCASE("alpha one pins each polytope to the reference row") {
    AmbiguityModel model = build_avar_ambiguity({1.0, ref}, inst);
    const auto& sa = std::get<SaRectModel>(model.stages[0]);
    Matrix verts = sa.sets[0][0].vertices();
    REQUIRE(verts.size() == 1);
    CHECK(verts[0][0] == doctest::Approx(0.5));
  }
  SUBCASE("alpha one half over a uniform reference frees the whole edge") {
    AmbiguityModel model = build_avar_ambiguity({0.5, ref}, inst);
    const auto& sa = std::get<SaRectModel>(model.stages[0]);
    Matrix verts = sa.sets[0][0].vertices();
    REQUIRE(verts.size() == 2);
    for (const Vec& v : verts) CHECK((std::abs(v[0] - 1.0) <= 1e-9 || std::abs(v[0]) <= 1e-9));
  }
  SUBCASE("zero reference probability forces the coordinate to zero") {
    Kernel degenerate;
    degenerate.stages.push_back(StageKernel{{{{1.0, 0.0}, {1.0, 0.0}}}});
    AmbiguityModel model = build_avar_ambiguity({0.3, degenerate}, inst);
    const auto& sa = std::get<SaRectModel>(model.stages[0]);
    for (const Vec& v : sa.sets[0][0].vertices()) CHECK(std::abs(v[1]) <= 1e-9);
  }
}

TEST_CASE("nested recursion equals the robust solve on the induced model") {
  SUBCASE("alpha one is the nominal solve") {
    testing::Rng rng(11);
    MdpInstance inst = testing::random_instance(rng, {1, 3, 2}, 2);
    Kernel ref = testing::random_kernel(rng, inst);
    NestedRiskSolution nested = solve_nested_risk(inst, {1.0, ref});
    NominalSolution nominal = solve_nominal(inst, ref);
    for (int t = 0; t <= inst.horizon; ++t)
      for (int s = 0; s < inst.num_states(t); ++s)
        CHECK(nested.values.values[t][s] ==
              doctest::Approx(nominal.values.values[t][s]).epsilon(1e-10));
  }
  SUBCASE("the two-point lottery at level one half") {
    Fixture fx = get_fixture("avar_demo");
    NestedRiskSolution nested = solve_nested_risk(fx.file.mdp, *fx.file.avar);
    CHECK(nested.values.values[0][0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("random instances across risk levels") {
    testing::Rng rng(13);
    for (int trial = 0; trial < 15; ++trial) {
      MdpInstance inst = testing::random_instance(rng, {1, 3, 2}, 2);
      Kernel ref = testing::random_kernel(rng, inst);
      AvarSpec spec{rng.uniform(0.15, 1.0), ref};
      NestedRiskSolution nested = solve_nested_risk(inst, spec);
      AmbiguityModel induced = build_avar_ambiguity(spec, inst);
      RobustSolution robust = solve_primal(inst, induced);
      for (int t = 0; t <= inst.horizon; ++t)
        for (int s = 0; s < inst.num_states(t); ++s)
          CHECK(std::abs(nested.values.values[t][s] - robust.values.values[t][s]) <= 1e-7);
    }
  }
}

TEST_CASE("pushforward of the noise set") {
  Fixture fx = get_fixture("soc_demo");
  const SocSpec& spec = *fx.file.soc;

  SUBCASE("the map is linear in the noise distribution") {
    SocInduced induced = build_soc_ambiguity(spec);
    const auto& m = std::get<FiniteKernelSetModel>(induced.ambiguity.stages[0]);
    REQUIRE(m.kernels.size() == 2);
    CHECK(m.convex_hull);
    // Blend the vertex images by hand and compare against the pushforward of
    // the blended distribution.
    const Vec q_mix = {0.5 * 0.2 + 0.5 * 0.8, 0.5 * 0.8 + 0.5 * 0.2};
    for (int s = 0; s < 2; ++s)
      for (int nxt = 0; nxt < 4; ++nxt) {
        const double blended = 0.5 * m.kernels[0].rows[s][0][nxt] + 0.5 * m.kernels[1].rows[s][0][nxt];
        double direct = 0.0;
        for (int xi = 0; xi < 2; ++xi)
          if (spec.transition[0][s][0][xi] == nxt) direct += q_mix[xi];
        CHECK(blended == doctest::Approx(direct).epsilon(1e-12));
      }
  }
  SUBCASE("a singleton noise set induces a singleton kernel model") {
    SocSpec single = spec;
    single.noise_ambiguity = {Polytope::from_vertices({{0.3, 0.7}})};
    SocInduced induced = build_soc_ambiguity(single);
    CHECK(std::holds_alternative<SingletonModel>(induced.ambiguity.stages[0]));
    CHECK(induced.cost_reduction_ok);
  }
  SUBCASE("an injective image relabels the noise segment") {
    SocInduced induced = build_soc_ambiguity(spec);
    UnionOfPolytopes marg = marginalize_statewise(induced.ambiguity.stages[0], induced.instance, 0, 0);
    REQUIRE(marg.pieces.size() == 1);
    const Matrix& verts = marg.pieces[0].vertex_list;
    REQUIRE(verts.size() == 2);
    // Rows over (u_1, u_2) reproduce the noise vertices.
    for (const Vec& v : verts) CHECK((std::abs(v[0] - 0.2) <= 1e-12 || std::abs(v[0] - 0.8) <= 1e-12));
  }
}

TEST_CASE("noise-space solve handles colliding images with distinct costs") {
  // Two noise points map to the same successor but carry different costs, so
  // the kernel reduction is refused while the noise-space solve proceeds.
  SocSpec spec;
  spec.horizon = 1;
  spec.states = {{"s"}, {"u"}};
  spec.actions = {{"a", "b"}};
  spec.noise = {{"lo", "hi"}};
  spec.transition = {{{{0, 0}, {0, 0}}}};
  spec.cost = {{{{1.0, 2.0}, {1.5, 1.5}}}};
  spec.noise_ambiguity = {Polytope::from_vertices({{0.25, 0.75}, {0.75, 0.25}})};
  spec.terminal_cost = {0.0};
  spec.initial_state = 0;

  SocInduced induced = build_soc_ambiguity(spec);
  CHECK(!induced.cost_reduction_ok);
  CHECK(induced.note.find("noise space") != std::string::npos);

  SocSolution sol = solve_soc(spec);
  // Action a costs up to 0.25 + 0.75*2 = 1.75 at the worst vertex; action b
  // is flat at 1.5.
  CHECK(sol.values.values[0][0] == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(sol.policy.rows[0][0][1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("rectangularity probe") {
  SUBCASE("distinct images with a noise segment produce a certified witness") {
    Fixture fx = get_fixture("soc_demo");
    SocProbeReport rep = soc_rectangularity_probe(*fx.file.soc);
    CHECK(rep.applicable);
    CHECK(rep.not_s_rectangular);
    REQUIRE(rep.product.witness);
    CHECK(rep.product.witness_distance > 1e-6);
    // Verify the witness independently: distance to the induced hull.
    SocInduced induced = build_soc_ambiguity(*fx.file.soc);
    CHECK(kernel_membership_distance(induced.ambiguity.stages[0], induced.instance, 0,
                                     *rep.product.witness) > 1e-6);
  }
  SUBCASE("a singleton noise set is inconclusive") {
    Fixture fx = get_fixture("soc_demo");
    SocSpec spec = *fx.file.soc;
    spec.noise_ambiguity = {Polytope::from_vertices({{0.4, 0.6}})};
    SocProbeReport rep = soc_rectangularity_probe(spec);
    CHECK(!rep.applicable);
    CHECK(!rep.not_s_rectangular);
  }
  SUBCASE("colliding images skip the assertion branch") {
    Fixture fx = get_fixture("soc_demo");
    SocSpec spec = *fx.file.soc;
    spec.transition[0][1][0] = {0, 1};  // reuse the images of state s_1
    spec.cost[0][1][0] = spec.cost[0][0][0];
    SocProbeReport rep = soc_rectangularity_probe(spec);
    CHECK(!rep.applicable);
  }
}

TEST_CASE("two actions sharing images induce perfectly correlated rows") {
  // Both actions push the same noise through the same map, so the induced
  // rows are tied together: the per-(s,a) product recombination leaves the
  // set, while the game values only see the marginals.
  SocSpec spec;
  spec.horizon = 1;
  spec.states = {{"s"}, {"u_1", "u_2"}};
  spec.actions = {{"a", "b"}};
  spec.noise = {{"lo", "hi"}};
  spec.transition = {{{{0, 1}, {0, 1}}}};
  spec.cost = {{{{0.0, 0.0}, {0.4, 0.4}}}};
  spec.noise_ambiguity = {Polytope::from_vertices({{0.1, 0.9}, {0.9, 0.1}})};
  spec.terminal_cost = {1.0, 0.0};
  spec.initial_state = 0;

  SocInduced induced = build_soc_ambiguity(spec);
  REQUIRE(induced.cost_reduction_ok);
  ProductProbeReport probe =
      sa_product_membership_probe(induced.ambiguity.stages[0], induced.instance, 0);
  CHECK(probe.conclusive);
  CHECK(!probe.product_contained);

  EnlargementReport enl = enlargement_invariance(induced.instance, induced.ambiguity);
  CHECK(enl.primal_match);
  CHECK(enl.dual_match);
}

TEST_CASE("noise-space and induced-game values agree when the reduction holds") {
  Fixture fx = get_fixture("soc_demo");
  SocSolution sol = solve_soc(*fx.file.soc);
  SocInduced induced = build_soc_ambiguity(*fx.file.soc);
  REQUIRE(induced.cost_reduction_ok);
  RobustSolution primal = solve_primal(induced.instance, induced.ambiguity);
  for (int t = 0; t <= fx.file.soc->horizon; ++t)
    for (int s = 0; s < fx.file.soc->num_states(t); ++s)
      CHECK(std::abs(sol.values.values[t][s] - primal.values.values[t][s]) <= 1e-9);
}
