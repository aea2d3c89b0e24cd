#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esep/constraints.hpp"
#include "esep/errors.hpp"
#include "esep/graph.hpp"
#include "esep/separation.hpp"
#include "esep/table.hpp"

namespace esep {

enum class BoundsVariant { Auto, General, Strengthened };

inline const char* to_string(BoundsVariant v) {
  switch (v) {
    case BoundsVariant::Auto: return "auto";
    case BoundsVariant::General: return "general";
    case BoundsVariant::Strengthened: return "strengthened";
  }
  return "?";
}

// One bounded interventional query: p(y = y_state | do(x = x_state, d), c).
struct BoundsQuery {
  std::string x;
  int x_state = 0;
  std::string y;
  int y_state = 0;
  Assignment d;
  Assignment c;
  BoundsVariant variant = BoundsVariant::Auto;
};

struct VariantBounds {
  double lower = 0.0;
  double upper = 1.0;
};

struct BoundsResult {
  double lower = 0.0;  // intersection over the evaluated variants
  double upper = 1.0;
  std::string variant_used;
  std::optional<VariantBounds> general;
  std::optional<VariantBounds> strengthened;
  bool strengthened_admissible = false;
  std::map<std::string, double> inputs;  // conditional probabilities consumed
};

namespace detail {

// Graph-side admissibility of a bounds query: with the x→y edge removed
// (when present), x must be e-separated from y given keys(c) after deleting
// keys(d), with C outside the descendants of D.  Returns whether the
// strengthened variant is also admissible (x not a descendant of D).
inline bool validate_bounds_graph(const Dag& g, const BoundsQuery& q) {
  int xi = g.index_of(q.x);
  int yi = g.index_of(q.y);
  if (!g.observed(xi) || !g.observed(yi))
    throw QueryError("bounds endpoints must be observed");
  if (xi == yi) throw QueryError("bounds endpoints must differ");
  std::vector<std::string> dn, cn;
  for (const auto& [n, _] : q.d) dn.push_back(n);
  for (const auto& [n, _] : q.c) cn.push_back(n);
  for (const auto& n : dn)
    if (n == q.x || n == q.y || q.c.count(n))
      throw QueryError("query sets overlap on '" + n + "'");
  for (const auto& n : cn)
    if (n == q.x || n == q.y)
      throw QueryError("query sets overlap on '" + n + "'");

  const Dag base = g.has_edge(xi, yi) ? remove_edge(g, q.x, q.y) : g;
  VertexSet dset = base.vertex_set(dn);
  VertexSet cset = base.vertex_set(cn);
  if (!set_intersect(cset, descendants(base, dset)).empty())
    throw QueryError("conditioning set descends from the deletion set");
  SeparationQuery sq{base.vertex_set({q.x}), base.vertex_set({q.y}), cset,
                     dset};
  if (!e_separated(base, sq).separated)
    throw QueryError("'" + q.x + "' is not e-separated from '" + q.y +
                     "' given C after deleting D (with the direct edge "
                     "removed); the bounds do not apply");
  // the direct edge cannot lie on a directed path into x, so descent from D
  // is the same question in g and in base
  return !descendants(g, g.vertex_set(dn)).contains(xi);
}

}  // namespace detail

// Bounds on p(y | do(x, d), c) from the observed joint.
//
//   general:       L = max{0, p(x,y,d|c) / (p(x,d|c) + 1 − p(d|c))}
//                  U = min{(p(x,y,d|c) + 1 − p(d|c)) / (p(x,d|c) + 1 − p(d|c)), 1}
//   strengthened:  L = p(y,d|x,c)
//                  U = p(y,d|x,c) + 1 − p(d|x,c)
//
// variant Auto evaluates every admissible variant and intersects (max of
// lowers, min of uppers) — valid bounds intersect to a valid bound.  An
// empty intersection beyond tolerance falsifies the model.
inline BoundsResult interventional_bounds(const Dag& g, const JointTable& t,
                                          const BoundsQuery& q,
                                          double null_tol = 1e-12,
                                          double falsify_tol = 1e-7) {
  bool strengthened_ok = detail::validate_bounds_graph(g, q);
  if (q.variant == BoundsVariant::Strengthened && !strengthened_ok)
    throw QueryError("strengthened variant requires '" + q.x +
                     "' not to descend from the deletion set");

  Assignment xass{{q.x, q.x_state}};
  Assignment yass{{q.y, q.y_state}};
  auto joined = [](std::initializer_list<const Assignment*> parts) {
    Assignment out;
    for (const Assignment* p : parts)
      for (const auto& kv : *p) out.insert(kv);
    return out;
  };

  BoundsResult r;
  r.strengthened_admissible = strengthened_ok;

  double pc = q.c.empty() ? 1.0 : t.prob(q.c);
  if (pc <= null_tol)
    throw ZeroConditioningEvent("context c has near-zero probability");
  double p_xyd_c = t.prob(joined({&xass, &yass, &q.d, &q.c})) / pc;
  double p_xd_c = t.prob(joined({&xass, &q.d, &q.c})) / pc;
  double p_d_c = q.d.empty() ? 1.0 : t.prob(joined({&q.d, &q.c})) / pc;
  r.inputs["p(x,y,d|c)"] = p_xyd_c;
  r.inputs["p(x,d|c)"] = p_xd_c;
  r.inputs["p(d|c)"] = p_d_c;

  bool want_general = q.variant == BoundsVariant::General ||
                      q.variant == BoundsVariant::Auto;
  bool want_strength = q.variant == BoundsVariant::Strengthened ||
                       (q.variant == BoundsVariant::Auto && strengthened_ok);

  if (want_general) {
    double denom = p_xd_c + 1.0 - p_d_c;
    if (denom <= null_tol)
      throw ZeroConditioningEvent(
          "general-variant denominator p(x,d|c) + 1 - p(d|c) is near zero");
    VariantBounds vb;
    vb.lower = std::max(0.0, p_xyd_c / denom);
    vb.upper = std::min((p_xyd_c + 1.0 - p_d_c) / denom, 1.0);
    r.general = vb;
  }
  if (want_strength) {
    double p_xc = t.prob(joined({&xass, &q.c}));
    if (p_xc <= null_tol)
      throw ZeroConditioningEvent(
          "strengthened variant needs p(x,c) > 0 to condition on x");
    double p_yd_xc = t.prob(joined({&xass, &yass, &q.d, &q.c})) / p_xc;
    double p_d_xc =
        q.d.empty() ? 1.0 : t.prob(joined({&xass, &q.d, &q.c})) / p_xc;
    r.inputs["p(y,d|x,c)"] = p_yd_xc;
    r.inputs["p(d|x,c)"] = p_d_xc;
    VariantBounds vb;
    vb.lower = p_yd_xc;
    vb.upper = p_yd_xc + 1.0 - p_d_xc;
    r.strengthened = vb;
  }

  r.lower = 0.0;
  r.upper = 1.0;
  if (r.general) {
    r.lower = std::max(r.lower, r.general->lower);
    r.upper = std::min(r.upper, r.general->upper);
  }
  if (r.strengthened) {
    r.lower = std::max(r.lower, r.strengthened->lower);
    r.upper = std::min(r.upper, r.strengthened->upper);
  }
  if (r.general && r.strengthened)
    r.variant_used = "intersection(general,strengthened)";
  else
    r.variant_used = r.general ? "general" : "strengthened";
  if (r.lower > r.upper + falsify_tol)
    throw ModelFalsified("bound intersection is empty: lower " +
                         std::to_string(r.lower) + " exceeds upper " +
                         std::to_string(r.upper));
  r.upper = std::max(r.upper, r.lower);  // collapse sub-tolerance inversions
  return r;
}

struct AcdeResult {
  double lower = -1.0;
  double upper = 1.0;
  bool includes_zero = true;
  BoundsResult arm0, arm1;  // per-arm p(y=y1 | do(x=i, d), c) bounds
};

// Bounds on the average controlled direct effect
// p(y₁ | do(x₁, d), c) − p(y₁ | do(x₀, d), c) for binary x and y:
// combine the per-arm interval endpoints crosswise.
inline AcdeResult acde_bounds(const Dag& g, const JointTable& t,
                              BoundsQuery q, double null_tol = 1e-12) {
  if (t.states_of(q.x) != 2 || t.states_of(q.y) != 2)
    throw QueryError("acde bounds require binary treatment and outcome");
  q.y_state = 1;
  AcdeResult out;
  q.x_state = 0;
  out.arm0 = interventional_bounds(g, t, q, null_tol);
  q.x_state = 1;
  out.arm1 = interventional_bounds(g, t, q, null_tol);
  out.lower = out.arm1.lower - out.arm0.upper;
  out.upper = out.arm1.upper - out.arm0.lower;
  out.includes_zero = out.lower <= 0.0 && 0.0 <= out.upper;
  return out;
}

// Closed-form ACDE bounds for the binary instrument graph, one per
// conditioning arm x of the treatment:
//   lower = p(y₁, x | z₁) + p(y₀, x | z₀) − 1
//   upper = 1 − p(y₀, x | z₁) − p(y₁, x | z₀)
inline AcdeResult iv_acde_bounds(const CondXYZ& p, int x) {
  p.validate();
  if (p.nx != 2 || p.ny != 2 || p.nz != 2)
    throw QueryError("iv acde bounds require binary z, x, y");
  if (x < 0 || x >= 2) throw QueryError("x state out of range");
  AcdeResult out;
  out.lower = p.at(x, 1, 1) + p.at(x, 0, 0) - 1.0;
  out.upper = 1.0 - p.at(x, 0, 1) - p.at(x, 1, 0);
  out.includes_zero = out.lower <= 0.0 && 0.0 <= out.upper;
  return out;
}

}  // namespace esep
