#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "esep/separation.hpp"
#include "fixtures.hpp"

using namespace esep;

namespace {

SeparationQuery query(const Dag& g, const std::vector<std::string>& a,
                      const std::vector<std::string>& b,
                      const std::vector<std::string>& c = {},
                      const std::vector<std::string>& d = {}) {
  return SeparationQuery{g.vertex_set(a), g.vertex_set(b), g.vertex_set(c),
                         g.vertex_set(d)};
}

}  // namespace

TEST_CASE("textbook d-separation verdicts") {
  SECTION("chain blocks through the middle") {
    Dag g = parse_graph("A -> B\nB -> C\n");
    CHECK_FALSE(d_separated(g, query(g, {"A"}, {"C"})).separated);
    CHECK(d_separated(g, query(g, {"A"}, {"C"}, {"B"})).separated);
  }
  SECTION("fork blocks through the root") {
    Dag g = parse_graph("B -> A\nB -> C\n");
    CHECK_FALSE(d_separated(g, query(g, {"A"}, {"C"})).separated);
    CHECK(d_separated(g, query(g, {"A"}, {"C"}, {"B"})).separated);
  }
  SECTION("collider blocks unless conditioned") {
    Dag g = parse_graph("A -> C\nB -> C\nC -> D\n");
    CHECK(d_separated(g, query(g, {"A"}, {"B"})).separated);
    CHECK_FALSE(d_separated(g, query(g, {"A"}, {"B"}, {"C"})).separated);
    // a descendant of the collider opens it too
    CHECK_FALSE(d_separated(g, query(g, {"A"}, {"B"}, {"D"})).separated);
  }
}

TEST_CASE("witness paths are reported and lexicographically least") {
  // two open paths A-M1-B and A-M2-B; the reachability check says
  // connected, the search must return the alphabetically first trail
  Dag g = parse_graph("A -> M1\nM1 -> B\nA -> M2\nM2 -> B\n");
  auto v = d_separated(g, query(g, {"A"}, {"B"}));
  REQUIRE_FALSE(v.separated);
  REQUIRE(v.witness_path);
  CHECK(*v.witness_path == std::vector<std::string>{"A", "M1", "B"});

  auto vb = d_separated_bruteforce(g, query(g, {"A"}, {"B"}));
  CHECK(vb.witness_path == v.witness_path);

  // separated queries carry no path
  auto sep = d_separated(g, query(g, {"A"}, {"B"}, {"M1", "M2"}));
  CHECK(sep.separated);
  CHECK_FALSE(sep.witness_path.has_value());
}

TEST_CASE("query validation") {
  Dag g = fixtures::iv_graph();
  CHECK_THROWS_AS(d_separated(g, query(g, {}, {"Y"})), QueryError);
  CHECK_THROWS_AS(d_separated(g, query(g, {"Z"}, {"Z"})), QueryError);
  CHECK_THROWS_AS(d_separated(g, query(g, {"Z"}, {"Y"}, {"U"})), QueryError);
  // deletion sets belong to e-separation queries only
  CHECK_THROWS_AS(d_separated(g, query(g, {"Z"}, {"Y"}, {}, {"X"})),
                  QueryError);
  CHECK_NOTHROW(e_separated(g, query(g, {"Z"}, {"Y"}, {}, {"X"})));
}

TEST_CASE("instrument is cut off from the outcome by deleting the exposure") {
  Dag g = fixtures::iv_graph();
  CHECK_FALSE(d_separated(g, query(g, {"Z"}, {"Y"})).separated);
  CHECK_FALSE(d_separated(g, query(g, {"Z"}, {"Y"}, {"X"})).separated);
  CHECK(e_separated(g, query(g, {"Z"}, {"Y"}, {}, {"X"})).separated);
  CHECK(e_separated_star(g, query(g, {"Z"}, {"Y"}, {}, {"X"})).separated);
}

TEST_CASE("deleting a vertex differs from conditioning on it") {
  // conditioning on a collider opens it; deleting it never does
  Dag g = parse_graph("A -> C\nB -> C\n");
  CHECK_FALSE(d_separated(g, query(g, {"A"}, {"B"}, {"C"})).separated);
  CHECK(e_separated(g, query(g, {"A"}, {"B"}, {}, {"C"})).separated);
}

TEST_CASE("fast d-separation matches the literal path enumeration") {
  std::mt19937_64 rng(20260816);
  int checked = 0;
  for (int it = 0; it < 200; ++it) {
    Dag g = fixtures::random_dag(rng, 6, 2);
    std::vector<int> obs = g.observed_set().ids();
    if (obs.size() < 2) continue;
    int a = obs[rng() % obs.size()];
    int b = obs[rng() % obs.size()];
    if (a == b) continue;
    VertexSet c = fixtures::random_observed_subset(rng, g,
                                                   VertexSet({a, b}));
    SeparationQuery q{VertexSet({a}), VertexSet({b}), c, VertexSet{}};
    auto fast = d_separated(g, q);
    auto slow = d_separated_bruteforce(g, q);
    REQUIRE(fast.separated == slow.separated);
    if (!fast.separated) REQUIRE(fast.witness_path == slow.witness_path);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("subgraph and edge-cut characterizations of e-separation agree") {
  std::mt19937_64 rng(77001);
  int checked = 0;
  for (int it = 0; it < 150; ++it) {
    Dag g = fixtures::random_dag(rng, 6, 2);
    std::vector<int> obs = g.observed_set().ids();
    if (obs.size() < 2) continue;
    int a = obs[rng() % obs.size()];
    int b = obs[rng() % obs.size()];
    if (a == b) continue;
    VertexSet used({a, b});
    VertexSet c = fixtures::random_observed_subset(rng, g, used);
    VertexSet d = fixtures::random_observed_subset(
        rng, g, set_union(used, c));
    SeparationQuery q{VertexSet({a}), VertexSet({b}), c, d};
    CHECK(e_separated(g, q).separated == e_separated_star(g, q).separated);
    ++checked;
  }
  CHECK(checked > 80);
}

TEST_CASE("brute-force enumeration rejects oversized graphs") {
  std::string text;
  for (int i = 0; i + 1 < 12; ++i)
    text += "V" + std::to_string(i) + " -> V" + std::to_string(i + 1) + "\n";
  Dag g = parse_graph(text);
  CHECK_THROWS_AS(
      d_separated_bruteforce(g, query(g, {"V0"}, {"V11"})),
      QueryError);
}
