#include <catch2/catch_amalgamated.hpp>

#include "esep/graph.hpp"
#include "fixtures.hpp"

using namespace esep;

TEST_CASE("parse_graph builds vertices in first-mention order") {
  Dag g = parse_graph("Z -> X\nX -> Y\nlatent U\nU -> X\nU -> Y\n");
  REQUIRE(g.size() == 4);
  CHECK(g.name(0) == "Z");
  CHECK(g.name(1) == "X");
  CHECK(g.name(2) == "Y");
  CHECK(g.name(3) == "U");
  CHECK(g.observed(0));
  CHECK_FALSE(g.observed(3));
  CHECK(g.states(0) == 2);  // implicit vertices are binary
  CHECK(g.states(3) == 0);  // latent cardinality is not the graph's business
  CHECK(g.has_edge(g.index_of("Z"), g.index_of("X")));
  CHECK(g.adjacent(g.index_of("X"), g.index_of("Z")));
  CHECK_FALSE(g.adjacent(g.index_of("Z"), g.index_of("Y")));
}

TEST_CASE("parse_graph handles declarations, comments, and tight arrows") {
  Dag g = parse_graph(
      "# a three-state treatment\n"
      "var X 3\n"
      "Z->X  # no spaces around the arrow\n"
      "X->Y\n");
  CHECK(g.states(g.index_of("X")) == 3);
  CHECK(g.states(g.index_of("Z")) == 2);
  CHECK(g.size() == 3);
}

TEST_CASE("bidirected edges introduce fresh latent parents") {
  Dag g = parse_graph("A <-> B\nA<->C\n");
  REQUIRE(g.size() == 5);
  // per-line numbering: A, B, _L1, C, _L2
  CHECK(g.name(2) == "_L1");
  CHECK(g.name(4) == "_L2");
  CHECK_FALSE(g.observed(2));
  CHECK(g.has_edge(2, 0));
  CHECK(g.has_edge(2, 1));
  CHECK(g.has_edge(4, 0));
  CHECK(g.has_edge(4, 3));
}

TEST_CASE("parse_graph rejects malformed input with line numbers") {
  auto expect_line = [](const char* text, std::size_t line) {
    try {
      parse_graph(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("A -> B\nnot a directive\n", 2);
  expect_line("A -> A\n", 1);                 // self-edge
  expect_line("var X 1\n", 1);                // state count below 2
  expect_line("var X two\n", 1);              // non-numeric state count
  expect_line("A -> B\nvar B 2\nvar B 3\n", 3);
  expect_line("A -> B=C\n", 1);               // '=' reserved for assignments
}

TEST_CASE("graph-level violations surface as parse errors") {
  CHECK_THROWS_AS(parse_graph("A -> B\nB -> A\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("latent U\nA -> U\n"), ParseError);
  CHECK_THROWS_MATCHES(parse_graph("A -> B\nB -> C\nC -> A\n"), ParseError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("cycle")));
  // repeated edge lines are tolerated, duplicate edges in the ctor are not
  CHECK_NOTHROW(parse_graph("A -> B\nA -> B\n"));
  CHECK_THROWS_AS(Dag({{"A", Visibility::Observed, 2},
                       {"B", Visibility::Observed, 2}},
                      {{"A", "B"}, {"A", "B"}}),
                  QueryError);
}

TEST_CASE("ancestors and descendants are reflexive") {
  Dag g = parse_graph("A -> B\nB -> C\nD -> C\n");
  VertexSet anc = ancestors(g, g.vertex_set({"C"}));
  CHECK(anc.contains(g.index_of("A")));
  CHECK(anc.contains(g.index_of("B")));
  CHECK(anc.contains(g.index_of("C")));
  CHECK(anc.contains(g.index_of("D")));
  VertexSet desc = descendants(g, g.vertex_set({"B"}));
  CHECK(desc == g.vertex_set({"B", "C"}));
  CHECK(descendants(g, VertexSet{}).empty());
}

TEST_CASE("graph surgery operations") {
  Dag g = fixtures::iv_graph();
  int z = g.index_of("Z"), x = g.index_of("X"), y = g.index_of("Y");

  SECTION("induced subgraph drops vertices and their edges") {
    Dag sub = induced_subgraph(g, g.vertex_set({"Z", "Y", "U"}));
    CHECK(sub.size() == 3);
    CHECK_THROWS_AS(sub.index_of("X"), QueryError);
    CHECK(sub.has_edge(sub.index_of("U"), sub.index_of("Y")));
    CHECK(sub.edges().size() == 1);  // only U -> Y survives
  }
  SECTION("remove_outgoing keeps the vertex, cuts its children") {
    Dag star = remove_outgoing(g, g.vertex_set({"X"}));
    CHECK(star.size() == g.size());
    CHECK_FALSE(star.has_edge(x, y));
    CHECK(star.has_edge(z, x));  // incoming edges survive
  }
  SECTION("remove_incoming cuts parents") {
    Dag cut = remove_incoming(g, g.vertex_set({"X"}));
    CHECK_FALSE(cut.has_edge(z, x));
    CHECK(cut.has_edge(x, y));
  }
  SECTION("remove_edge drops exactly one edge") {
    Dag cut = remove_edge(g, "X", "Y");
    CHECK_FALSE(cut.has_edge(x, y));
    CHECK(cut.edges().size() == g.edges().size() - 1);
    CHECK_THROWS_AS(remove_edge(g, "Y", "X"), QueryError);
  }
}

TEST_CASE("vertex set algebra") {
  VertexSet a({3, 1, 2});
  VertexSet b({2, 5});
  CHECK(a.size() == 3);
  CHECK(set_intersect(a, b) == VertexSet({2}));
  CHECK(set_union(a, b) == VertexSet({1, 2, 3, 5}));
  CHECK(set_minus(a, b) == VertexSet({1, 3}));
  CHECK_FALSE(a.disjoint_with(b));
  CHECK(a.disjoint_with(VertexSet({4})));
  CHECK(VertexSet({2}).subset_of(a));
  CHECK(VertexSet({1, 1, 1}) == VertexSet({1}));
}

TEST_CASE("topological order is respected by construction") {
  // shuffled declaration order must still produce a valid DAG
  Dag g = parse_graph("C -> D\nA -> B\nB -> C\n");
  const auto& topo = g.topological_order();
  std::vector<int> pos(g.size());
  for (std::size_t i = 0; i < topo.size(); ++i) pos[topo[i]] = static_cast<int>(i);
  for (const auto& [p, c] : g.edges()) CHECK(pos[p] < pos[c]);
}
