#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "esep/errors.hpp"
#include "esep/graph.hpp"
#include "esep/table.hpp"

namespace esep {

// Conditional probability table of one vertex given its graph parents.
// `parents` must match the graph's parent list for the child exactly
// (ascending vertex index, rendered as names).  Rows are laid out row-major
// over the parent states, first parent slowest.
struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  int child_states = 2;
  std::vector<int> parent_states;

  // rows[row * child_states + s] = p(child = s | parents = row)
  std::vector<double> rows;

  std::size_t row_count() const {
    std::size_t n = 1;
    for (int k : parent_states) n *= static_cast<std::size_t>(k);
    return n;
  }

  std::size_t row_offset(const std::vector<int>& pa) const {
    if (pa.size() != parent_states.size())
      throw QueryError("parent assignment arity mismatch for '" + child + "'");
    std::size_t off = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (pa[i] < 0 || pa[i] >= parent_states[i])
        throw QueryError("parent state out of range for '" + child + "'");
      off = off * static_cast<std::size_t>(parent_states[i]) +
            static_cast<std::size_t>(pa[i]);
    }
    return off;
  }

  double at(const std::vector<int>& pa, int s) const {
    return rows.at(row_offset(pa) * child_states + s);
  }
  double& at(const std::vector<int>& pa, int s) {
    return rows.at(row_offset(pa) * child_states + s);
  }

  void validate(double row_tol = 1e-12) const {
    if (child_states < 2)
      throw QueryError("cpt for '" + child + "' needs at least 2 states");
    if (rows.size() != row_count() * static_cast<std::size_t>(child_states))
      throw QueryError("cpt for '" + child + "' has wrong size");
    for (std::size_t r = 0; r < row_count(); ++r) {
      double sum = 0.0;
      for (int s = 0; s < child_states; ++s) {
        double x = rows[r * child_states + s];
        if (x < 0.0 || std::isnan(x))
          throw QueryError("negative or NaN entry in cpt for '" + child + "'");
        sum += x;
      }
      if (std::abs(sum - 1.0) > row_tol)
        throw QueryError("cpt row for '" + child + "' sums to " +
                         std::to_string(sum));
    }
  }
};

// Fully specified discrete model: a DAG, a state count per vertex, and one
// CPT per vertex in graph order.
struct DiscreteModel {
  Dag graph;
  std::vector<int> states;  // by vertex index, >= 2 everywhere
  std::vector<Cpt> cpts;    // index-aligned with graph vertices

  int states_of(int v) const { return states.at(v); }
  int states_of(const std::string& name) const {
    return states.at(graph.index_of(name));
  }

  void validate() const {
    if (states.size() != graph.size() || cpts.size() != graph.size())
      throw QueryError("model arity does not match graph");
    for (std::size_t v = 0; v < graph.size(); ++v) {
      if (states[v] < 2)
        throw QueryError("vertex '" + graph.name(v) +
                         "' needs at least 2 states");
      if (graph.observed(v) && graph.states(v) != 0 &&
          graph.states(v) != states[v])
        throw QueryError("state count for '" + graph.name(v) +
                         "' disagrees with the graph declaration");
      const Cpt& c = cpts[v];
      if (c.child != graph.name(v))
        throw QueryError("cpt order does not match graph order");
      const auto& pa = graph.parents(static_cast<int>(v));
      if (c.parents.size() != pa.size())
        throw QueryError("cpt parent list mismatch for '" + c.child + "'");
      for (std::size_t i = 0; i < pa.size(); ++i) {
        if (c.parents[i] != graph.name(pa[i]))
          throw QueryError("cpt parent list mismatch for '" + c.child + "'");
        if (c.parent_states[i] != states[pa[i]])
          throw QueryError("cpt parent states mismatch for '" + c.child + "'");
      }
      if (c.child_states != states[v])
        throw QueryError("cpt child states mismatch for '" + c.child + "'");
      c.validate();
    }
  }
};

// Exact joint over all vertices (latent included), by direct factorization.
// Refuses to materialize more than `cell_cap` cells.
inline JointTable joint(const DiscreteModel& m,
                        std::size_t cell_cap = 10'000'000) {
  m.validate();
  const Dag& g = m.graph;
  std::vector<JointTable::Var> vars;
  std::size_t cells = 1;
  for (std::size_t v = 0; v < g.size(); ++v) {
    vars.push_back({g.name(v), m.states[v]});
    cells *= static_cast<std::size_t>(m.states[v]);
    if (cells > cell_cap)
      throw SizeCapError("joint would exceed the cell cap");
  }

  JointTable t(vars);
  std::vector<int> idx(g.size(), 0);
  std::vector<int> pa_states;
  for (std::size_t flat = 0; flat < t.cell_count(); ++flat) {
    double p = 1.0;
    for (std::size_t v = 0; v < g.size() && p > 0.0; ++v) {
      pa_states.clear();
      for (int u : g.parents(static_cast<int>(v))) pa_states.push_back(idx[u]);
      p *= m.cpts[v].at(pa_states, idx[v]);
    }
    t.cell(idx) = p;
    t.advance(idx);
  }
  return t;
}

// Joint over the observed vertices only (latents summed out).
inline JointTable observed_margin(const DiscreteModel& m,
                                  std::size_t cell_cap = 10'000'000) {
  JointTable full = joint(m, cell_cap);
  return full.marginalize(m.graph.names_of(m.graph.observed_set()));
}

// Intervention: cut the incoming edges of every assigned vertex and replace
// its CPT by a point mass on the assigned state.
inline DiscreteModel intervene(const DiscreteModel& m, const Assignment& on) {
  m.validate();
  const Dag& g = m.graph;
  std::vector<std::string> names;
  for (const auto& [name, state] : on) {
    int v = g.index_of(name);
    if (!g.observed(v))
      throw QueryError("cannot intervene on latent vertex '" + name + "'");
    if (state < 0 || state >= m.states[v])
      throw QueryError("state " + std::to_string(state) +
                       " out of range for '" + name + "'");
    names.push_back(name);
  }
  DiscreteModel out;
  out.graph = remove_incoming(g, g.vertex_set(names));
  out.states = m.states;
  out.cpts = m.cpts;
  for (const auto& [name, state] : on) {
    int v = g.index_of(name);
    Cpt& c = out.cpts[v];
    c.parents.clear();
    c.parent_states.clear();
    c.rows.assign(static_cast<std::size_t>(c.child_states), 0.0);
    c.rows[static_cast<std::size_t>(state)] = 1.0;
  }
  return out;
}

// p(y | do(on), given), computed from the truncated factorization.  `y` and
// `given` must be observed and disjoint from each other and from `on`.
inline double interventional_query(const DiscreteModel& m, const Assignment& y,
                                   const Assignment& on,
                                   const Assignment& given = {},
                                   std::size_t cell_cap = 10'000'000) {
  for (const auto& [name, _] : y)
    if (on.count(name) || given.count(name))
      throw QueryError("outcome variable '" + name + "' reused in the query");
  for (const auto& [name, _] : given)
    if (on.count(name))
      throw QueryError("conditioning variable '" + name +
                       "' is also intervened");
  DiscreteModel post = intervene(m, on);
  JointTable t = observed_margin(post, cell_cap);
  Assignment yg = y;
  for (const auto& kv : given) yg.insert(kv);
  double denom = given.empty() ? 1.0 : t.prob(given);
  if (denom <= 1e-12)
    throw ZeroConditioningEvent(
        "conditioning event has near-zero probability under the intervention");
  return t.prob(yg) / denom;
}

// The conditioning-fix transform: clamp the parents in `d` to their given
// states inside every CPT (the clamped variables keep their own CPTs), and
// pair the result with the outgoing-edge-deleted graph.  The transformed
// model factorizes over that graph; its joint agrees with the original on
// every cell consistent with `d`, and on every margin that avoids the
// descendants of the fixed vertices.
inline DiscreteModel fix_conditioning(const DiscreteModel& m,
                                      const Assignment& d) {
  m.validate();
  const Dag& g = m.graph;
  std::vector<std::string> names;
  std::vector<int> fixed(g.size(), -1);
  for (const auto& [name, state] : d) {
    int v = g.index_of(name);
    if (!g.observed(v))
      throw QueryError("cannot fix latent vertex '" + name + "'");
    if (state < 0 || state >= m.states[v])
      throw QueryError("state " + std::to_string(state) +
                       " out of range for '" + name + "'");
    fixed[v] = state;
    names.push_back(name);
  }

  DiscreteModel out;
  out.graph = remove_outgoing(g, g.vertex_set(names));
  out.states = m.states;
  out.cpts.resize(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    const Cpt& c = m.cpts[v];
    const auto& pa = g.parents(static_cast<int>(v));
    bool touched = false;
    for (int u : pa)
      if (fixed[u] >= 0) touched = true;
    if (!touched) {
      out.cpts[v] = c;
      continue;
    }
    Cpt nc;
    nc.child = c.child;
    nc.child_states = c.child_states;
    std::vector<std::size_t> free_pos;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (fixed[pa[i]] < 0) {
        nc.parents.push_back(c.parents[i]);
        nc.parent_states.push_back(c.parent_states[i]);
        free_pos.push_back(i);
      }
    }
    nc.rows.assign(nc.row_count() * static_cast<std::size_t>(nc.child_states),
                   0.0);
    std::vector<int> sub(free_pos.size(), 0);
    std::vector<int> full(pa.size(), 0);
    for (std::size_t i = 0; i < pa.size(); ++i)
      if (fixed[pa[i]] >= 0) full[i] = fixed[pa[i]];
    std::size_t nrows = nc.row_count();
    for (std::size_t r = 0; r < nrows; ++r) {
      for (std::size_t k = 0; k < free_pos.size(); ++k)
        full[free_pos[k]] = sub[k];
      for (int s = 0; s < nc.child_states; ++s)
        nc.rows[r * nc.child_states + s] = c.at(full, s);
      // odometer over the free parents, last fastest
      for (std::size_t k = free_pos.size(); k-- > 0;) {
        if (++sub[k] < nc.parent_states[k]) break;
        sub[k] = 0;
      }
    }
    out.cpts[v] = std::move(nc);
  }
  return out;
}

// Largest deviation |p(a,b|c) - p(a|c) p(b|c)| over all states, maximized
// over conditioning assignments with p(c) above the null threshold.  This is
// the workhorse for Markov-property checks.
inline double max_ci_deviation(const JointTable& t, const std::string& a,
                               const std::string& b,
                               const std::vector<std::string>& c,
                               double null_tol = 1e-12) {
  std::vector<std::string> keep = {a, b};
  keep.insert(keep.end(), c.begin(), c.end());
  JointTable abc = t.marginalize(keep);

  // iterate over assignments of c
  std::vector<JointTable::Var> cvars;
  for (const auto& v : abc.variables())
    if (v.name != a && v.name != b) cvars.push_back(v);
  int na = abc.states_of(a);
  int nb = abc.states_of(b);

  double worst = 0.0;
  std::vector<int> cidx(cvars.size(), 0);
  std::size_t c_count = 1;
  for (const auto& v : cvars) c_count *= static_cast<std::size_t>(v.states);
  for (std::size_t flat = 0; flat < c_count; ++flat) {
    Assignment cass;
    for (std::size_t i = 0; i < cvars.size(); ++i)
      cass[cvars[i].name] = cidx[i];
    double pc = abc.prob(cass);
    if (pc > null_tol) {
      for (int sa = 0; sa < na; ++sa) {
        Assignment ac = cass;
        ac[a] = sa;
        double pac = abc.prob(ac);
        for (int sb = 0; sb < nb; ++sb) {
          Assignment bc = cass;
          bc[b] = sb;
          Assignment abass = ac;
          abass[b] = sb;
          double dev = std::abs(abc.prob(abass) / pc -
                                (pac / pc) * (abc.prob(bc) / pc));
          worst = std::max(worst, dev);
        }
      }
    }
    // odometer over c
    for (std::size_t i = cvars.size(); i-- > 0;) {
      if (++cidx[i] < cvars[i].states) break;
      cidx[i] = 0;
    }
  }
  return worst;
}

}  // namespace esep
