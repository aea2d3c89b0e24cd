#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "esep/errors.hpp"
#include "esep/graph.hpp"

namespace esep {

// A separation query over observed vertices: is `a` independent of `b`
// given `c`, after deleting `d`?  Plain d-separation queries leave `d`
// empty.  All four sets must be pairwise disjoint and observed.
struct SeparationQuery {
  VertexSet a;
  VertexSet b;
  VertexSet c;
  VertexSet d;
};

struct SeparationVerdict {
  bool separated = false;
  // An unblocked path witnessing the connection, as vertex names; only
  // present when `separated` is false.  For deletion queries the path lives
  // in the vertex-deleted subgraph (which shares names with the original).
  std::optional<std::vector<std::string>> witness_path;
};

namespace detail {

inline void require_observed(const Dag& g, const VertexSet& s,
                             const char* label) {
  for (int v : s) {
    if (v < 0 || v >= static_cast<int>(g.size()))
      throw QueryError(std::string(label) + " contains an index outside the graph");
    if (!g.observed(v))
      throw QueryError(std::string(label) + " contains latent vertex '" +
                       g.name(v) + "'");
  }
}

inline void validate_query(const Dag& g, const SeparationQuery& q,
                           bool allow_deletion) {
  if (q.a.empty() || q.b.empty())
    throw QueryError("both endpoint sets must be nonempty");
  if (!allow_deletion && !q.d.empty())
    throw QueryError("deletion set not allowed in a plain d-separation query");
  require_observed(g, q.a, "A");
  require_observed(g, q.b, "B");
  require_observed(g, q.c, "C");
  require_observed(g, q.d, "D");
  const VertexSet* sets[4] = {&q.a, &q.b, &q.c, &q.d};
  const char* names[4] = {"A", "B", "C", "D"};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (!sets[i]->disjoint_with(*sets[j]))
        throw QueryError(std::string(names[i]) + " and " + names[j] +
                         " overlap");
}

// Reachability formulation of d-connection.  A trail is explored one edge at
// a time; the only state that matters at a vertex is whether the trail
// arrived along an incoming edge (head-at-v) or an outgoing one (tail-at-v):
//
//   arrived head-at-v:  continue to a child (v is a pass-through, needs
//                       v not in C), or bounce back to a parent (v is a
//                       collider, needs an ancestor of C, reflexively)
//   arrived tail-at-v:  continue anywhere (v is a chain or fork, needs
//                       v not in C)
//
// Start vertices behave like tail arrivals: unconstrained since A and C are
// disjoint.  Two states per vertex, O(V + E).
inline bool d_connected_reach(const Dag& g, const VertexSet& a,
                              const VertexSet& b, const VertexSet& c) {
  const VertexSet anc_c = ancestors(g, c);
  const std::size_t n = g.size();
  std::vector<char> seen(2 * n, 0);  // [v] tail, [n + v] head
  std::deque<std::pair<int, bool>> queue;  // (vertex, arrived_head)
  for (int v : a) {
    seen[v] = 1;
    queue.emplace_back(v, false);
  }
  while (!queue.empty()) {
    auto [v, head] = queue.front();
    queue.pop_front();
    if (b.contains(v)) return true;
    auto push = [&](int w, bool h) {
      std::size_t slot = h ? g.size() + w : w;
      if (!seen[slot]) {
        seen[slot] = 1;
        queue.emplace_back(w, h);
      }
    };
    if (head) {
      if (!c.contains(v))
        for (int w : g.children(v)) push(w, true);
      if (anc_c.contains(v))
        for (int w : g.parents(v)) push(w, false);
    } else {
      if (!c.contains(v)) {
        for (int w : g.children(v)) push(w, true);
        for (int w : g.parents(v)) push(w, false);
      }
    }
  }
  return false;
}

// Is the internal vertex path[i] open on this path given C?
inline bool internal_open(const Dag& g, const std::vector<int>& path,
                          std::size_t i, const VertexSet& c,
                          const VertexSet& anc_c) {
  int prev = path[i - 1], v = path[i], next = path[i + 1];
  bool collider = g.has_edge(prev, v) && g.has_edge(next, v);
  return collider ? anc_c.contains(v) : !c.contains(v);
}

// Depth-first search over simple paths that only ever extends open
// prefixes, taking neighbours in ascending index order.  Returns the
// first unblocked path found, which is therefore the lexicographically
// least one.  Only called when d_connected_reach said "connected", so a
// result always exists.
inline std::optional<std::vector<int>> find_active_path(const Dag& g,
                                                        const VertexSet& a,
                                                        const VertexSet& b,
                                                        const VertexSet& c) {
  const VertexSet anc_c = ancestors(g, c);
  std::vector<int> path;
  std::vector<char> on_path(g.size(), 0);
  std::optional<std::vector<int>> found;

  auto neighbours = [&](int v) {
    std::vector<int> out;
    std::merge(g.parents(v).begin(), g.parents(v).end(),
               g.children(v).begin(), g.children(v).end(),
               std::back_inserter(out));
    return out;
  };

  auto dfs = [&](auto&& self, int v) -> bool {
    for (int w : neighbours(v)) {
      if (on_path[w]) continue;
      // openness of v as an internal vertex depends on the outgoing edge as
      // well as the incoming one, so it is re-checked per neighbour
      if (path.size() >= 2) {
        int prev = path[path.size() - 2];
        bool collider = g.has_edge(prev, v) && g.has_edge(w, v);
        bool open = collider ? anc_c.contains(v) : !c.contains(v);
        if (!open) continue;
      }
      path.push_back(w);
      on_path[w] = 1;
      if (b.contains(w)) {
        found = path;
        return true;
      }
      if (self(self, w)) return true;
      on_path[w] = 0;
      path.pop_back();
    }
    return false;
  };

  for (int start : a) {
    path.assign(1, start);
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[start] = 1;
    if (dfs(dfs, start)) return found;
  }
  return std::nullopt;
}

}  // namespace detail

// Plain d-separation (q.d must be empty).
inline SeparationVerdict d_separated(const Dag& g, const SeparationQuery& q) {
  detail::validate_query(g, q, /*allow_deletion=*/false);
  if (detail::d_connected_reach(g, q.a, q.b, q.c)) {
    auto path = detail::find_active_path(g, q.a, q.b, q.c);
    if (!path)
      throw Error("internal: reachability and path search disagree");
    std::vector<std::string> names;
    names.reserve(path->size());
    for (int v : *path) names.push_back(g.name(v));
    return SeparationVerdict{false, std::move(names)};
  }
  return SeparationVerdict{true, std::nullopt};
}

// e-separation via its definition: delete the vertices of `d` (dropping all
// their edges), then test d-separation in the induced subgraph.
inline SeparationVerdict e_separated(const Dag& g, const SeparationQuery& q) {
  detail::validate_query(g, q, /*allow_deletion=*/true);
  const Dag sub = induced_subgraph(g, set_minus(g.all_vertices(), q.d));
  SeparationQuery sq;
  sq.a = sub.vertex_set(g.names_of(q.a));
  sq.b = sub.vertex_set(g.names_of(q.b));
  sq.c = sub.vertex_set(g.names_of(q.c));
  return d_separated(sub, sq);
}

// e-separation via the edge-deletion characterization: remove every edge
// leaving `d`, keep all vertices, and test d-separation there.  Equivalent
// to `e_separated`; having both routes is the point.
inline SeparationVerdict e_separated_star(const Dag& g,
                                          const SeparationQuery& q) {
  detail::validate_query(g, q, /*allow_deletion=*/true);
  const Dag star = remove_outgoing(g, q.d);
  SeparationQuery sq{q.a, q.b, q.c, VertexSet{}};
  return d_separated(star, sq);
}

// Reference implementation: enumerate every simple path between the end
// point sets and apply the blocking definition to each, path by path.
// Exponential; guarded to small graphs.  Returns the lexicographically
// first unblocked path as witness.
inline SeparationVerdict d_separated_bruteforce(const Dag& g,
                                                const SeparationQuery& q) {
  detail::validate_query(g, q, /*allow_deletion=*/false);
  if (g.size() > 10)
    throw QueryError("brute-force separation is limited to 10 vertices");

  const VertexSet anc_c = ancestors(g, q.c);
  auto blocked = [&](const std::vector<int>& path) {
    for (std::size_t i = 1; i + 1 < path.size(); ++i)
      if (!detail::internal_open(g, path, i, q.c, anc_c)) return true;
    return false;
  };

  std::vector<int> path;
  std::vector<char> on_path(g.size(), 0);
  std::optional<std::vector<int>> witness;

  auto neighbours = [&](int v) {
    std::vector<int> out;
    std::merge(g.parents(v).begin(), g.parents(v).end(),
               g.children(v).begin(), g.children(v).end(),
               std::back_inserter(out));
    return out;
  };

  // Visits simple paths in lexicographic order (a prefix before all of its
  // extensions); the first path that ends in B and is unblocked wins.
  auto dfs = [&](auto&& self, int v) -> bool {
    for (int w : neighbours(v)) {
      if (on_path[w]) continue;
      path.push_back(w);
      on_path[w] = 1;
      if (q.b.contains(w) && !blocked(path)) {
        witness = path;
        return true;
      }
      if (self(self, w)) return true;
      on_path[w] = 0;
      path.pop_back();
    }
    return false;
  };

  for (int start : q.a) {
    path.assign(1, start);
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[start] = 1;
    if (dfs(dfs, start)) break;
  }

  if (witness) {
    std::vector<std::string> names;
    for (int v : *witness) names.push_back(g.name(v));
    return SeparationVerdict{false, std::move(names)};
  }
  return SeparationVerdict{true, std::nullopt};
}

}  // namespace esep
