#include <catch2/catch_amalgamated.hpp>
#include <string>

#include "esep/esep.hpp"
#include "fixtures.hpp"

using namespace esep;

namespace {

// serialize -> parse -> serialize must be a fixed point for every report
template <typename T>
void check_roundtrip(const T& value) {
  Record first = value;
  T reparsed = first.get<T>();
  Record second = reparsed;
  CHECK(first.dump(2) == second.dump(2));
  CHECK_FALSE(first.dump(2).empty());
}

}  // namespace

TEST_CASE("separation verdicts round-trip") {
  Dag g = fixtures::iv_graph();
  SeparationQuery blocked{g.vertex_set({"Z"}), g.vertex_set({"Y"}),
                          VertexSet{}, g.vertex_set({"X"})};
  SeparationQuery open{g.vertex_set({"Z"}), g.vertex_set({"Y"}), VertexSet{},
                       VertexSet{}};

  SeparationVerdict sep = e_separated(g, blocked);
  REQUIRE(sep.separated);
  REQUIRE_FALSE(sep.witness_path.has_value());
  check_roundtrip(sep);

  SeparationVerdict conn = d_separated(g, open);
  REQUIRE_FALSE(conn.separated);
  REQUIRE(conn.witness_path.has_value());
  check_roundtrip(conn);

  Record j = conn;
  CHECK(j["separated"] == false);
  CHECK(j["witness_path"].is_array());
  Record j2 = sep;
  CHECK(j2["witness_path"].is_null());
}

TEST_CASE("witness enumeration records round-trip") {
  Dag g = fixtures::four_var_graph();
  for (const TestablePair& p : testable_pairs(g)) check_roundtrip(p);
  for (const EsepWitness& w : enumerate_witnesses(g, "X", "Y"))
    check_roundtrip(w);
}

TEST_CASE("compatibility results round-trip") {
  JointTable t = fixtures::uc_correlated_table();
  ConditionalSlice s = make_slice(t, {"Z"}, {"Y"}, {}, {"X"}, {{"X", 0}},
                                  SliceForm::Weak);
  CompatibilityResult infeasible = weak_compatibility(s);
  REQUIRE_FALSE(infeasible.feasible);
  REQUIRE(infeasible.violating_c.has_value());
  check_roundtrip(infeasible);
  for (const BlockVerdict& b : infeasible.blocks) check_roundtrip(b);

  DiscreteModel m = fixtures::random_model_on(fixtures::kIvGraph, 8);
  ConditionalSlice ok =
      make_slice(observed_margin(m), {"Z"}, {"Y"}, {}, {"X"}, {{"X", 0}},
                 SliceForm::Strong);
  CompatibilityResult feasible = strong_compatibility(ok);
  REQUIRE(feasible.feasible);
  REQUIRE_FALSE(feasible.violating_c.has_value());
  check_roundtrip(feasible);
}

TEST_CASE("distribution check reports round-trip") {
  Dag g = fixtures::iv_graph();
  JointTable t = fixtures::iv_violating_table();
  auto witnesses = enumerate_witnesses(g, "Z", "Y");
  CheckReport report = check_distribution(g, t, witnesses);
  REQUIRE_FALSE(report.all_feasible);
  check_roundtrip(report);
  for (const SliceCheck& c : report.checks) check_roundtrip(c);

  Record j = report;
  CHECK(j["all_feasible"] == false);
  CHECK(j["checks"].is_array());
  CHECK(j["checks"].size() == report.checks.size());
}

TEST_CASE("bounds results round-trip") {
  Dag g = fixtures::direct_iv_graph();
  JointTable t = observed_margin(fixtures::random_model_on(
      fixtures::kDirectIvGraph, 21));

  BoundsQuery q;
  q.x = "Z";
  q.x_state = 1;
  q.y = "Y";
  q.y_state = 1;
  q.d = {{"X", 0}};

  BoundsResult both = interventional_bounds(g, t, q);
  REQUIRE(both.general.has_value());
  REQUIRE(both.strengthened.has_value());
  check_roundtrip(both);
  check_roundtrip(*both.general);

  q.variant = BoundsVariant::General;
  BoundsResult general_only = interventional_bounds(g, t, q);
  REQUIRE_FALSE(general_only.strengthened.has_value());
  check_roundtrip(general_only);
  Record j = general_only;
  CHECK(j["strengthened"].is_null());

  q.variant = BoundsVariant::Auto;
  check_roundtrip(acde_bounds(g, t, q));
}

TEST_CASE("sweep reports round-trip") {
  SweepOptions opts;
  opts.check_bounds = false;
  SweepReport clean = soundness_sweep(fixtures::iv_graph(), 3, 12, opts);
  check_roundtrip(clean);

  // exercise the violation payload even though real sweeps stay clean
  SweepReport dirty = clean;
  dirty.violations.push_back(
      SweepViolation{"compat", 2, derive_seed(12, 2), "margin 0.25"});
  check_roundtrip(dirty);
  check_roundtrip(dirty.violations[0]);

  Record j = dirty;
  CHECK(j["violations"].size() == 1);
  CHECK(j["violations"][0]["kind"] == "compat");
}

TEST_CASE("serialization is byte-stable across calls") {
  Dag g = fixtures::iv_graph();
  JointTable t = fixtures::iv_violating_table();
  auto witnesses = enumerate_witnesses(g, "Z", "Y");

  Record a = check_distribution(g, t, witnesses);
  Record b = check_distribution(g, t, witnesses);
  CHECK(a.dump(2) == b.dump(2));
}
