#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "esep/model.hpp"
#include "esep/oracle.hpp"
#include "fixtures.hpp"

using namespace esep;

namespace {

// Z -> X with hand-picked CPTs; every joint cell is checkable on paper.
DiscreteModel chain_model() {
  DiscreteModel m;
  m.graph = parse_graph("Z -> X\n");
  m.states = {2, 2};
  Cpt z;
  z.child = "Z";
  z.child_states = 2;
  z.rows = {0.3, 0.7};
  Cpt x;
  x.child = "X";
  x.child_states = 2;
  x.parents = {"Z"};
  x.parent_states = {2};
  x.rows = {0.9, 0.1,   // X | Z=0
            0.2, 0.8};  // X | Z=1
  m.cpts = {z, x};
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("joint factorizes over the graph") {
  DiscreteModel m = chain_model();
  JointTable t = joint(m);
  CHECK(t.prob({{"Z", 0}, {"X", 0}}) == Catch::Approx(0.27).margin(1e-15));
  CHECK(t.prob({{"Z", 0}, {"X", 1}}) == Catch::Approx(0.03).margin(1e-15));
  CHECK(t.prob({{"Z", 1}, {"X", 0}}) == Catch::Approx(0.14).margin(1e-15));
  CHECK(t.prob({{"Z", 1}, {"X", 1}}) == Catch::Approx(0.56).margin(1e-15));
  CHECK(t.mass() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("observed margin sums out the latents") {
  DiscreteModel m = fixtures::random_model_on(fixtures::kIvGraph, 42);
  JointTable full = joint(m);
  JointTable margin = observed_margin(m);
  REQUIRE(margin.variables().size() == 3);
  CHECK_FALSE(margin.has_variable("U"));
  CHECK(margin.prob({{"Z", 1}, {"X", 0}, {"Y", 1}}) ==
        Catch::Approx(full.prob({{"Z", 1}, {"X", 0}, {"Y", 1}}))
            .margin(1e-12));
  CHECK(margin.mass() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("joint enforces the cell cap") {
  DiscreteModel m = fixtures::random_model_on(fixtures::kIvGraph, 1);
  CHECK_THROWS_AS(joint(m, /*cell_cap=*/8), SizeCapError);
}

TEST_CASE("model validation catches inconsistent pieces") {
  DiscreteModel m = chain_model();
  SECTION("row sums must be 1") {
    m.cpts[1].rows[0] = 0.5;
    CHECK_THROWS_AS(m.validate(), QueryError);
  }
  SECTION("arity must match the graph") {
    m.states = {2};
    CHECK_THROWS_AS(m.validate(), QueryError);
  }
  SECTION("declared observed cardinality must agree") {
    m.states = {2, 3};
    CHECK_THROWS_AS(m.validate(), QueryError);
  }
  SECTION("cpt parents must mirror graph parents") {
    m.cpts[1].parents = {};
    m.cpts[1].parent_states = {};
    m.cpts[1].rows = {0.9, 0.1};
    CHECK_THROWS_AS(m.validate(), QueryError);
  }
}

TEST_CASE("intervention replaces the mechanism with a point mass") {
  DiscreteModel m = chain_model();
  DiscreteModel cut = intervene(m, {{"X", 1}});
  CHECK(cut.graph.parents(cut.graph.index_of("X")).empty());
  JointTable t = joint(cut);
  // Z keeps its marginal; X is pinned
  CHECK(t.prob({{"X", 1}}) == Catch::Approx(1.0).margin(1e-15));
  CHECK(t.prob({{"Z", 0}}) == Catch::Approx(0.3).margin(1e-15));

  CHECK_THROWS_AS(intervene(m, {{"Z", 5}}), QueryError);
  CHECK_THROWS_AS(intervene(m, {{"Q", 0}}), QueryError);
  DiscreteModel iv = fixtures::random_model_on(fixtures::kIvGraph, 3);
  CHECK_THROWS_AS(intervene(iv, {{"U", 0}}), QueryError);
}

TEST_CASE("interventional queries follow the truncated factorization") {
  DiscreteModel m = chain_model();
  // intervening on the root changes nothing downstream of the mechanism
  CHECK(interventional_query(m, {{"X", 1}}, {{"Z", 1}}) ==
        Catch::Approx(0.8).margin(1e-12));
  // intervening on X makes it independent of Z
  CHECK(interventional_query(m, {{"Z", 1}}, {{"X", 0}}) ==
        Catch::Approx(0.7).margin(1e-12));
  CHECK_THROWS_AS(interventional_query(m, {{"X", 1}}, {{"X", 1}}),
                  QueryError);
}

TEST_CASE("interventional queries support conditioning") {
  DiscreteModel m = fixtures::random_model_on(fixtures::kDirectIvGraph, 9);
  // p(y | do(x), z) against a direct computation on the surgered model
  DiscreteModel cut = intervene(m, {{"X", 1}});
  JointTable t = observed_margin(cut);
  double denom = t.prob({{"Z", 0}});
  REQUIRE(denom > 1e-9);
  double expect = t.prob({{"Y", 1}, {"Z", 0}}) / denom;
  CHECK(interventional_query(m, {{"Y", 1}}, {{"X", 1}}, {{"Z", 0}}) ==
        Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("conditioning fix clamps the deleted vertices' influence") {
  DiscreteModel m = fixtures::random_model_on(fixtures::kIvGraph, 7);
  Assignment d{{"X", 1}};
  DiscreteModel star = fix_conditioning(m, d);

  SECTION("the transformed graph loses the outgoing edges") {
    CHECK_FALSE(star.graph.has_edge(star.graph.index_of("X"),
                                    star.graph.index_of("Y")));
    CHECK(star.graph.has_edge(star.graph.index_of("Z"),
                              star.graph.index_of("X")));
  }
  SECTION("cells consistent with d are untouched") {
    JointTable a = joint(m);
    JointTable b = joint(star);
    CHECK(a.prob({{"X", 1}, {"Y", 1}, {"Z", 0}}) ==
          Catch::Approx(b.prob({{"X", 1}, {"Y", 1}, {"Z", 0}}))
              .margin(1e-12));
  }
  SECTION("the full report passes") {
    PstarReport rep = pstar_check(m, d);
    CAPTURE(rep.failures);
    CHECK(rep.ok);
    CHECK(rep.max_slice_dev < 1e-12);
    CHECK(rep.max_markov_dev < 1e-9);
    CHECK(rep.max_margin_dev < 1e-12);
  }
  SECTION("an empty fix is the identity") {
    DiscreteModel same = fix_conditioning(m, Assignment{});
    CHECK(joint(same).raw() == joint(m).raw());
  }
  CHECK_THROWS_AS(fix_conditioning(m, {{"U", 0}}), QueryError);
  CHECK_THROWS_AS(fix_conditioning(m, {{"X", 7}}), QueryError);
}

TEST_CASE("ci deviation separates independent from dependent tables") {
  JointTable ind({{"A", 2}, {"B", 2}});
  ind.raw() = {0.18, 0.12, 0.42, 0.28};  // product of (.3,.7) and (.6,.4)
  CHECK(max_ci_deviation(ind, "A", "B", {}) < 1e-15);

  JointTable dep({{"A", 2}, {"B", 2}});
  dep.raw() = {0.5, 0.0, 0.0, 0.5};
  CHECK(max_ci_deviation(dep, "A", "B", {}) == Catch::Approx(0.25));

  // conditional: A and B independent given C, dependent marginally
  DiscreteModel m;
  m.graph = parse_graph("C -> A\nC -> B\n");
  m.states = {2, 2, 2};
  Cpt c;
  c.child = "C";
  c.child_states = 2;
  c.rows = {0.5, 0.5};
  Cpt a;
  a.child = "A";
  a.child_states = 2;
  a.parents = {"C"};
  a.parent_states = {2};
  a.rows = {0.9, 0.1, 0.1, 0.9};
  Cpt b = a;
  b.child = "B";
  JointTable t = joint(DiscreteModel{m.graph, m.states, {c, a, b}});
  CHECK(max_ci_deviation(t, "A", "B", {"C"}) < 1e-14);
  CHECK(max_ci_deviation(t, "A", "B", {}) > 0.1);
}
