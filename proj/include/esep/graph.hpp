#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "esep/errors.hpp"

namespace esep {

enum class Visibility { Observed, Latent };

// Sorted, duplicate-free collection of vertex indices of one particular Dag.
// Indices are only meaningful relative to the graph they were resolved
// against; use Dag::vertex_set / Dag::names_of to cross graph boundaries.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::vector<int> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  bool contains(int v) const {
    return std::binary_search(ids_.begin(), ids_.end(), v);
  }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<int>& ids() const { return ids_; }

  bool disjoint_with(const VertexSet& o) const {
    for (int v : ids_)
      if (o.contains(v)) return false;
    return true;
  }
  bool subset_of(const VertexSet& o) const {
    for (int v : ids_)
      if (!o.contains(v)) return false;
    return true;
  }
  bool proper_subset_of(const VertexSet& o) const {
    return size() < o.size() && subset_of(o);
  }

  friend bool operator==(const VertexSet&, const VertexSet&) = default;

 private:
  std::vector<int> ids_;
};

inline VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return VertexSet(std::move(out));
}

inline VertexSet set_minus(const VertexSet& a, const VertexSet& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return VertexSet(std::move(out));
}

inline VertexSet set_intersect(const VertexSet& a, const VertexSet& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return VertexSet(std::move(out));
}

// One vertex declaration.  `states` is the declared number of states of an
// observed vertex (>= 2); latent vertices carry 0 here, meaning "decided by
// the model, not the graph".
struct VertexDecl {
  std::string name;
  Visibility vis = Visibility::Observed;
  int states = 2;
};

// Immutable directed acyclic graph over named vertices, each observed or
// latent.  Vertices are addressed by their insertion index; all derived
// orderings (edge lists, topological order, neighbour lists) break ties by
// that index, so structurally equal inputs give bit-identical behaviour.
class Dag {
 public:
  Dag() = default;

  Dag(std::vector<VertexDecl> vertices,
      const std::vector<std::pair<std::string, std::string>>& edges) {
    verts_ = std::move(vertices);
    for (std::size_t i = 0; i < verts_.size(); ++i) {
      const VertexDecl& v = verts_[i];
      if (v.name.empty()) throw QueryError("empty vertex name");
      if (!by_name_.emplace(v.name, static_cast<int>(i)).second)
        throw QueryError("duplicate vertex name '" + v.name + "'");
      if (v.vis == Visibility::Observed && v.states < 2)
        throw QueryError("vertex '" + v.name + "' needs at least 2 states");
      if (v.vis == Visibility::Latent && v.states != 0 && v.states < 2)
        throw QueryError("vertex '" + v.name + "' needs at least 2 states");
    }
    parents_.resize(verts_.size());
    children_.resize(verts_.size());
    for (const auto& [pname, cname] : edges) {
      int p = index_of(pname);
      int c = index_of(cname);
      if (p == c) throw QueryError("self-edge on '" + pname + "'");
      if (has_sorted(children_[p], c))
        throw QueryError("duplicate edge " + pname + " -> " + cname);
      insert_sorted(children_[p], c);
      insert_sorted(parents_[c], p);
      ++edge_count_;
    }
    for (std::size_t i = 0; i < verts_.size(); ++i)
      if (verts_[i].vis == Visibility::Latent && !parents_[i].empty())
        throw QueryError("latent vertex '" + verts_[i].name +
                         "' has a parent");
    topo_ = compute_topo();  // throws on cycles
  }

  std::size_t size() const { return verts_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  const std::string& name(int v) const { return verts_.at(v).name; }
  Visibility visibility(int v) const { return verts_.at(v).vis; }
  bool observed(int v) const {
    return verts_.at(v).vis == Visibility::Observed;
  }
  // Declared state count; 0 for latent vertices without one.
  int states(int v) const { return verts_.at(v).states; }

  std::optional<int> find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  int index_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end())
      throw QueryError("unknown vertex '" + name + "'");
    return it->second;
  }
  bool has_vertex(const std::string& name) const {
    return by_name_.count(name) != 0;
  }

  const std::vector<int>& parents(int v) const { return parents_.at(v); }
  const std::vector<int>& children(int v) const { return children_.at(v); }

  bool has_edge(int p, int c) const { return has_sorted(children_.at(p), c); }
  bool adjacent(int u, int v) const { return has_edge(u, v) || has_edge(v, u); }

  // Edges ordered by (parent index, child index).
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count_);
    for (int p = 0; p < static_cast<int>(verts_.size()); ++p)
      for (int c : children_[p]) out.emplace_back(p, c);
    return out;
  }

  VertexSet observed_set() const { return filter(Visibility::Observed); }
  VertexSet latent_set() const { return filter(Visibility::Latent); }
  VertexSet all_vertices() const {
    std::vector<int> ids(verts_.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return VertexSet(std::move(ids));
  }

  VertexSet vertex_set(const std::vector<std::string>& names) const {
    std::vector<int> ids;
    ids.reserve(names.size());
    for (const auto& n : names) ids.push_back(index_of(n));
    return VertexSet(std::move(ids));
  }
  std::vector<std::string> names_of(const VertexSet& s) const {
    std::vector<std::string> out;
    out.reserve(s.size());
    for (int v : s) out.push_back(name(v));
    return out;
  }

  // Kahn's algorithm, always taking the smallest ready index first.
  const std::vector<int>& topological_order() const { return topo_; }

  const std::vector<VertexDecl>& declarations() const { return verts_; }

 private:
  static bool has_sorted(const std::vector<int>& xs, int v) {
    return std::binary_search(xs.begin(), xs.end(), v);
  }
  static void insert_sorted(std::vector<int>& xs, int v) {
    xs.insert(std::upper_bound(xs.begin(), xs.end(), v), v);
  }

  VertexSet filter(Visibility vis) const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < verts_.size(); ++i)
      if (verts_[i].vis == vis) ids.push_back(static_cast<int>(i));
    return VertexSet(std::move(ids));
  }

  std::vector<int> compute_topo() const {
    std::vector<int> indeg(verts_.size());
    for (std::size_t i = 0; i < verts_.size(); ++i)
      indeg[i] = static_cast<int>(parents_[i].size());
    std::set<int> ready;
    for (std::size_t i = 0; i < verts_.size(); ++i)
      if (indeg[i] == 0) ready.insert(static_cast<int>(i));
    std::vector<int> order;
    order.reserve(verts_.size());
    while (!ready.empty()) {
      int v = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(v);
      for (int c : children_[v])
        if (--indeg[c] == 0) ready.insert(c);
    }
    if (order.size() != verts_.size()) throw QueryError("cycle detected");
    return order;
  }

  std::vector<VertexDecl> verts_;
  std::map<std::string, int> by_name_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::size_t edge_count_ = 0;
  std::vector<int> topo_;
};

// ---------------------------------------------------------------------------
// Pure graph operations.  All of them return fresh graphs / sets and leave
// their arguments untouched.

// Vertices reachable from `s` by following edges backwards, including `s`
// itself (every vertex is its own ancestor).
inline VertexSet ancestors(const Dag& g, const VertexSet& s) {
  std::vector<char> seen(g.size(), 0);
  std::vector<int> stack(s.begin(), s.end());
  for (int v : stack) seen[v] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : g.parents(v))
      if (!seen[p]) {
        seen[p] = 1;
        stack.push_back(p);
      }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) out.push_back(static_cast<int>(i));
  return VertexSet(std::move(out));
}

// Reflexive descendant closure, mirror image of `ancestors`.
inline VertexSet descendants(const Dag& g, const VertexSet& s) {
  std::vector<char> seen(g.size(), 0);
  std::vector<int> stack(s.begin(), s.end());
  for (int v : stack) seen[v] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int c : g.children(v))
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) out.push_back(static_cast<int>(i));
  return VertexSet(std::move(out));
}

inline VertexSet ancestors(const Dag& g, int v) {
  return ancestors(g, VertexSet({v}));
}
inline VertexSet descendants(const Dag& g, int v) {
  return descendants(g, VertexSet({v}));
}

// Subgraph over `keep`, dropping every edge with an endpoint outside.
// Kept vertices preserve their relative order (indices are renumbered).
inline Dag induced_subgraph(const Dag& g, const VertexSet& keep) {
  std::vector<VertexDecl> decls;
  decls.reserve(keep.size());
  for (int v : keep) decls.push_back(g.declarations().at(v));
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [p, c] : g.edges())
    if (keep.contains(p) && keep.contains(c))
      edges.emplace_back(g.name(p), g.name(c));
  return Dag(std::move(decls), edges);
}

// Same vertex set, with every edge leaving a vertex of `d` removed.
inline Dag remove_outgoing(const Dag& g, const VertexSet& d) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [p, c] : g.edges())
    if (!d.contains(p)) edges.emplace_back(g.name(p), g.name(c));
  return Dag(g.declarations(), edges);
}

// Same vertex set, with every edge entering a vertex of `x` removed.
inline Dag remove_incoming(const Dag& g, const VertexSet& x) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [p, c] : g.edges())
    if (!x.contains(c)) edges.emplace_back(g.name(p), g.name(c));
  return Dag(g.declarations(), edges);
}

// Drop one specific edge.
inline Dag remove_edge(const Dag& g, const std::string& parent,
                       const std::string& child) {
  int p = g.index_of(parent);
  int c = g.index_of(child);
  if (!g.has_edge(p, c))
    throw QueryError("no edge " + parent + " -> " + child);
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [ep, ec] : g.edges())
    if (!(ep == p && ec == c)) edges.emplace_back(g.name(ep), g.name(ec));
  return Dag(g.declarations(), edges);
}

// ---------------------------------------------------------------------------
// Text format.
//
//   A -> B        directed edge (vertices spring into existence as observed,
//                 binary, on first mention)
//   A <-> B       shared fresh latent parent _L<k>, numbered per line
//   latent NAME   mark NAME latent (it must never gain a parent)
//   var NAME [k]  declare an observed vertex with k states (default 2)
//   # ...         comment, also allowed after a directive

namespace detail {

inline std::string replace_all(std::string s, std::string_view from,
                               std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

inline void check_vertex_name(const std::string& name, std::size_t lineno) {
  if (name.find_first_of(",=#") != std::string::npos)
    throw ParseError(lineno, "invalid character in vertex name '" + name + "'");
}

}  // namespace detail

inline Dag parse_graph(std::string_view text) {
  struct PendingVertex {
    std::string name;
    Visibility vis = Visibility::Observed;
    int states = 0;       // 0 = not explicitly declared
    bool explicit_decl = false;
  };
  std::vector<PendingVertex> verts;
  std::map<std::string, int> index;
  std::vector<std::pair<int, int>> edge_list;
  std::set<std::pair<int, int>> edge_seen;

  auto ensure = [&](const std::string& name, std::size_t lineno) {
    detail::check_vertex_name(name, lineno);
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(verts.size());
    verts.push_back(PendingVertex{name});
    index.emplace(name, id);
    return id;
  };
  auto add_edge = [&](int p, int c, std::size_t lineno) {
    if (p == c)
      throw ParseError(lineno, "cycle detected (self-edge on '" +
                                   verts[p].name + "')");
    if (edge_seen.emplace(p, c).second) edge_list.emplace_back(p, c);
    // repeated edge lines are harmless; keep the first occurrence only
  };

  std::size_t lineno = 0;
  int bidirected = 0;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    // tolerate arrows written without surrounding spaces; hide "<->" while
    // spacing out "->" since one contains the other
    line = detail::replace_all(std::move(line), "<->", "\x01");
    line = detail::replace_all(std::move(line), "->", " -> ");
    line = detail::replace_all(std::move(line), "\x01", " <-> ");
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok.size() == 3 && tok[1] == "->") {
      int p = ensure(tok[0], lineno);
      int c = ensure(tok[2], lineno);
      add_edge(p, c, lineno);
    } else if (tok.size() == 3 && tok[1] == "<->") {
      int a = ensure(tok[0], lineno);
      int b = ensure(tok[2], lineno);
      ++bidirected;
      std::string lname = "_L" + std::to_string(bidirected);
      if (index.count(lname))
        throw ParseError(lineno, "duplicate vertex name '" + lname +
                                     "' (reserved for <-> latents)");
      int l = static_cast<int>(verts.size());
      verts.push_back(
          PendingVertex{lname, Visibility::Latent, 0, /*explicit=*/true});
      index.emplace(lname, l);
      add_edge(l, a, lineno);
      add_edge(l, b, lineno);
    } else if (tok.size() == 2 && tok[0] == "latent") {
      int v = ensure(tok[1], lineno);
      if (verts[v].explicit_decl)
        throw ParseError(lineno, "duplicate declaration of '" + tok[1] + "'");
      verts[v].vis = Visibility::Latent;
      verts[v].explicit_decl = true;
    } else if ((tok.size() == 2 || tok.size() == 3) && tok[0] == "var") {
      int v = ensure(tok[1], lineno);
      if (verts[v].explicit_decl)
        throw ParseError(lineno, "duplicate declaration of '" + tok[1] + "'");
      int k = 2;
      if (tok.size() == 3) {
        try {
          std::size_t used = 0;
          k = std::stoi(tok[2], &used);
          if (used != tok[2].size()) throw std::invalid_argument(tok[2]);
        } catch (const std::exception&) {
          throw ParseError(lineno, "bad state count '" + tok[2] + "'");
        }
        if (k < 2)
          throw ParseError(lineno, "state count must be >= 2, got " + tok[2]);
      }
      verts[v].vis = Visibility::Observed;
      verts[v].states = k;
      verts[v].explicit_decl = true;
    } else {
      throw ParseError(lineno, "cannot parse '" + line + "'");
    }
  }

  std::vector<VertexDecl> decls;
  decls.reserve(verts.size());
  for (const auto& v : verts) {
    int states = v.vis == Visibility::Observed ? (v.states ? v.states : 2) : 0;
    decls.push_back(VertexDecl{v.name, v.vis, states});
  }
  std::vector<std::pair<std::string, std::string>> edges;
  edges.reserve(edge_list.size());
  for (auto [p, c] : edge_list)
    edges.emplace_back(verts[p].name, verts[c].name);

  try {
    return Dag(std::move(decls), edges);
  } catch (const QueryError& e) {
    throw ParseError(std::string("invalid graph: ") + e.what());
  }
}

}  // namespace esep
