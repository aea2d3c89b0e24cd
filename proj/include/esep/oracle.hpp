#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "esep/bounds.hpp"
#include "esep/constraints.hpp"
#include "esep/errors.hpp"
#include "esep/graph.hpp"
#include "esep/model.hpp"
#include "esep/separation.hpp"
#include "esep/table.hpp"

namespace esep {

// ---------------------------------------------------------------------------
// Random model generation.

struct ModelGenSpec {
  Dag graph;
  std::uint64_t seed = 0;
  int latent_states = 4;       // cardinality given to latent vertices
  double concentration = 1.0;  // Dirichlet parameter for CPT rows
  std::map<std::string, int> state_overrides;
};

// Mix a base seed with an index into an independent-looking stream seed
// (splitmix64 finalizer); sweeps use this so every model is replayable from
// (graph, seed, index) alone.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Every CPT row drawn from a symmetric Dirichlet via normalized gamma
// variates; one sequential stream keeps the output a pure function of spec.
inline DiscreteModel random_model(const ModelGenSpec& spec) {
  const Dag& g = spec.graph;
  DiscreteModel m;
  m.graph = g;
  m.states.resize(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    auto it = spec.state_overrides.find(g.name(v));
    if (it != spec.state_overrides.end()) {
      if (it->second < 2) throw QueryError("state override below 2");
      m.states[v] = it->second;
    } else if (g.observed(v)) {
      m.states[v] = g.states(v) ? g.states(v) : 2;
    } else {
      if (spec.latent_states < 2)
        throw QueryError("latent_states must be at least 2");
      m.states[v] = spec.latent_states;
    }
  }
  if (spec.concentration <= 0.0)
    throw QueryError("concentration must be positive");

  std::mt19937_64 rng(spec.seed);
  std::gamma_distribution<double> gamma(spec.concentration, 1.0);
  m.cpts.resize(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    Cpt c;
    c.child = g.name(v);
    c.child_states = m.states[v];
    for (int u : g.parents(static_cast<int>(v))) {
      c.parents.push_back(g.name(u));
      c.parent_states.push_back(m.states[u]);
    }
    c.rows.resize(c.row_count() * static_cast<std::size_t>(c.child_states));
    for (std::size_t r = 0; r < c.row_count(); ++r) {
      double sum = 0.0;
      while (sum <= 1e-12) {  // resample the pathological all-zero draw
        sum = 0.0;
        for (int s = 0; s < c.child_states; ++s) {
          double x = gamma(rng);
          c.rows[r * c.child_states + s] = x;
          sum += x;
        }
      }
      for (int s = 0; s < c.child_states; ++s)
        c.rows[r * c.child_states + s] /= sum;
    }
    m.cpts[v] = std::move(c);
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Grid-search compatibility oracle.  The weak form scans A-marginals u on a
// positive simplex grid; for each u the cheapest dominating B-side costs
// Σ_b max_a M[a,b]/u(a), so the dominance deficit at u is that sum minus 1.
// The verdict is the minimum deficit over the grid — the same scale the
// solver reports, reached by exhaustion instead of descent.  The strong
// form has a closed-form criterion and needs no search.

inline CompatibilityResult brute_force_compat(const ConditionalSlice& s,
                                              int grid,
                                              double tol = kCompatTolerance) {
  s.validate();
  if (s.na > 4 || s.nb > 4)
    throw QueryError("brute-force compatibility is limited to 4 states");
  if (grid < 2 || grid > 128) throw QueryError("grid must be in [2, 128]");

  CompatibilityResult out;
  out.skipped_c = s.skipped_c;
  for (const auto& blk : s.blocks) {
    BlockVerdict v;
    v.c = blk.c;
    if (s.form == SliceForm::Strong) {
      double sum = 0.0;
      for (std::size_t b = 0; b < s.nb; ++b) {
        double best = 0.0;
        for (std::size_t a = 0; a < s.na; ++a)
          if (blk.row_valid[a]) best = std::max(best, blk.m[a * s.nb + b]);
        sum += best;
      }
      v.margin = sum - 1.0;
    } else {
      // rows with mass need u(a) > 0; massless rows impose nothing
      std::vector<std::size_t> active;
      for (std::size_t a = 0; a < s.na; ++a) {
        double mass = 0.0;
        for (std::size_t b = 0; b < s.nb; ++b) mass += blk.m[a * s.nb + b];
        if (blk.row_valid[a] && mass > 0.0) active.push_back(a);
      }
      const std::size_t n = active.size();
      if (n == 0) {
        v.margin = -1.0;
      } else if (static_cast<int>(n) > grid) {
        throw QueryError("grid too coarse for the number of active rows");
      } else {
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> best_u;
        std::vector<int> extra(n, 0);
        const int remaining = grid - static_cast<int>(n);
        std::vector<double> u(n);
        while (true) {
          int used = 0;
          for (std::size_t i = 0; i + 1 < n; ++i) used += extra[i];
          if (used <= remaining) {
            if (n > 0) extra[n - 1] = remaining - used;
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i)
              u[i] = static_cast<double>(1 + extra[i]) /
                     static_cast<double>(grid);
            for (std::size_t b = 0; b < s.nb; ++b) {
              double hi = 0.0;
              for (std::size_t i = 0; i < n; ++i)
                hi = std::max(hi, blk.m[active[i] * s.nb + b] / u[i]);
              total += hi;
            }
            if (total < best) {
              best = total;
              best_u = u;
            }
          }
          if (n == 1) break;
          std::size_t pos = 0;
          while (pos + 1 < n && ++extra[pos] > remaining) extra[pos++] = 0;
          if (pos + 1 >= n) break;
        }
        v.margin = best - 1.0;
        if (v.margin <= tol) {
          v.qa.assign(s.na, 0.0);
          for (std::size_t i = 0; i < n; ++i) v.qa[active[i]] = best_u[i];
        }
      }
    }
    out.blocks.push_back(std::move(v));
  }
  out.margin = -1.0;
  for (const auto& v : out.blocks)
    if (v.margin > out.margin) {
      out.margin = v.margin;
      if (v.margin > tol) out.violating_c = v.c;
    }
  out.feasible = out.margin <= tol;
  if (out.feasible) out.violating_c.reset();
  return out;
}

// ---------------------------------------------------------------------------
// Direct bilinear search for the binary unobserved-confounding system: can
// the off-slice mass be placed so the combined (Y, Z) table has determinant
// zero (= independence)?  The determinant h is continuous on the connected
// candidate simplex, so a zero exists iff h changes sign (or vanishes);
// the grid reports the observed range of h.

struct UcBilinearResult {
  double hmin = 0.0;
  double hmax = 0.0;
  bool feasible = false;
};

// `t` is an observed margin over three binary variables; `x`, `y`, `z` name
// them; `xi` fixes the slice X = xi whose cells are pinned to the data.
inline UcBilinearResult uc_bilinear_search(const JointTable& t,
                                           const std::string& x,
                                           const std::string& y,
                                           const std::string& z, int xi,
                                           int grid) {
  if (t.states_of(x) != 2 || t.states_of(y) != 2 || t.states_of(z) != 2)
    throw QueryError("bilinear search requires binary variables");
  if (grid < 2 || grid > 256) throw QueryError("grid must be in [2, 256]");
  double f[2][2];
  double fixed_mass = 0.0;
  for (int sy = 0; sy < 2; ++sy)
    for (int sz = 0; sz < 2; ++sz) {
      f[sy][sz] = t.prob({{x, xi}, {y, sy}, {z, sz}});
      fixed_mass += f[sy][sz];
    }
  const double free_mass = std::max(0.0, 1.0 - fixed_mass);

  UcBilinearResult out;
  out.hmin = std::numeric_limits<double>::infinity();
  out.hmax = -std::numeric_limits<double>::infinity();
  // q over the 4-cell simplex scaled to free_mass, resolution 1/grid
  for (int k00 = 0; k00 <= grid; ++k00)
    for (int k01 = 0; k01 <= grid - k00; ++k01)
      for (int k10 = 0; k10 <= grid - k00 - k01; ++k10) {
        int k11 = grid - k00 - k01 - k10;
        double q00 = free_mass * k00 / grid;
        double q01 = free_mass * k01 / grid;
        double q10 = free_mass * k10 / grid;
        double q11 = free_mass * k11 / grid;
        double h = (f[0][0] + q00) * (f[1][1] + q11) -
                   (f[0][1] + q01) * (f[1][0] + q10);
        out.hmin = std::min(out.hmin, h);
        out.hmax = std::max(out.hmax, h);
      }
  out.feasible = out.hmin <= 0.0 && out.hmax >= 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Soundness sweep: generate models, check every discovered constraint and
// every admissible bound against exact ground truth.

struct SweepOptions {
  int latent_states = 4;
  double concentration = 1.0;
  std::size_t max_c = SIZE_MAX;
  std::size_t max_d = SIZE_MAX;
  bool check_compat = true;
  bool check_bounds = true;
  double tol = 1e-9;  // violation threshold for margins and containment
};

struct SweepViolation {
  std::string kind;  // "compat" | "containment" | "dominance" | "falsified"
  int model_index = 0;
  std::uint64_t model_seed = 0;
  std::string detail;
};

struct SweepReport {
  int n_models = 0;
  std::size_t compat_slices = 0;
  std::size_t bound_queries = 0;
  std::size_t skipped = 0;  // null-event slices and queries
  double max_compat_margin = -1.0;
  double max_containment_violation = 0.0;
  double max_dominance_violation = 0.0;
  std::vector<SweepViolation> violations;
};

namespace detail {

inline std::string describe(const Assignment& a) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : a) {
    if (!first) out += ",";
    out += k + "=" + std::to_string(v);
    first = false;
  }
  return out + "}";
}

inline std::string describe(const EsepWitness& w) {
  auto join = [](const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
      out += (i ? "," : "") + xs[i];
    return out;
  };
  return "C={" + join(w.c) + "} D={" + join(w.d) + "}" +
         (w.strong ? " strong" : "");
}

// enumerate assignments over named binary/k-ary vars from the model's states
inline std::vector<Assignment> assignments_over(
    const std::vector<std::string>& names, const DiscreteModel& m) {
  std::vector<Assignment> out;
  std::vector<int> card;
  for (const auto& n : names) card.push_back(m.states_of(n));
  std::vector<int> idx(names.size(), 0);
  while (true) {
    Assignment a;
    for (std::size_t i = 0; i < names.size(); ++i) a[names[i]] = idx[i];
    out.push_back(std::move(a));
    std::size_t pos = names.size();
    while (pos-- > 0) {
      if (++idx[pos] < card[pos]) break;
      idx[pos] = 0;
      if (pos == 0) return out;
    }
    if (names.empty()) return out;
  }
}

}  // namespace detail

inline SweepReport soundness_sweep(const Dag& g, int n_models,
                                   std::uint64_t seed,
                                   const SweepOptions& opts = {}) {
  SweepReport report;
  report.n_models = n_models;

  // Witness discovery depends only on the graph; hoist it out of the loop.
  std::vector<EsepWitness> compat_witnesses;
  const VertexSet obs = g.observed_set();
  for (int x : obs)
    for (int y : obs) {
      if (x == y || g.adjacent(x, y)) continue;
      auto ws =
          enumerate_witnesses(g, g.name(x), g.name(y), opts.max_c, opts.max_d);
      compat_witnesses.insert(compat_witnesses.end(), ws.begin(), ws.end());
    }

  struct BoundTarget {
    std::string x, y;
    std::vector<EsepWitness> witnesses;
  };
  std::vector<BoundTarget> bound_targets;
  for (int x : obs)
    for (int y : obs) {
      if (x == y) continue;
      if ((g.states(x) ? g.states(x) : 2) != 2) continue;
      if ((g.states(y) ? g.states(y) : 2) != 2) continue;
      Dag base = g.has_edge(x, y) ? remove_edge(g, g.name(x), g.name(y)) : g;
      if (base.adjacent(base.index_of(g.name(x)), base.index_of(g.name(y))))
        continue;  // still adjacent (reverse edge): bounds never apply
      auto ws = enumerate_witnesses(base, g.name(x), g.name(y), opts.max_c,
                                    opts.max_d);
      if (!ws.empty())
        bound_targets.push_back(BoundTarget{g.name(x), g.name(y), ws});
    }

  for (int i = 0; i < n_models; ++i) {
    ModelGenSpec spec;
    spec.graph = g;
    spec.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    spec.latent_states = opts.latent_states;
    spec.concentration = opts.concentration;
    DiscreteModel m = random_model(spec);
    JointTable t = observed_margin(m);

    if (opts.check_compat && !compat_witnesses.empty()) {
      CheckReport chk = check_distribution(g, t, compat_witnesses);
      report.compat_slices += chk.checks.size();
      report.skipped += chk.skipped_slices;
      report.max_compat_margin =
          std::max(report.max_compat_margin, chk.max_margin);
      for (const auto& sc : chk.checks)
        if (sc.result.margin > opts.tol)
          report.violations.push_back(SweepViolation{
              "compat", i, spec.seed,
              detail::describe(sc.witness) + " d=" + detail::describe(sc.d) +
                  " margin=" + std::to_string(sc.result.margin)});
    }

    if (!opts.check_bounds) continue;

    for (const auto& target : bound_targets) {
      for (const auto& w : target.witnesses) {
        for (const Assignment& dass : detail::assignments_over(w.d, m)) {
          // exact interventional margins, one per treatment arm
          JointTable arm_margin[2];
          for (int arm = 0; arm < 2; ++arm) {
            Assignment doass = dass;
            doass[target.x] = arm;
            arm_margin[arm] = observed_margin(intervene(m, doass));
          }
          for (const Assignment& cass : detail::assignments_over(w.c, m)) {
            double truth[2];  // p(y=1 | do(x=arm, d), c)
            bool skip = false;
            for (int arm = 0; arm < 2 && !skip; ++arm) {
              double pc = cass.empty() ? 1.0 : arm_margin[arm].prob(cass);
              if (pc <= 1e-12) {
                skip = true;
                break;
              }
              Assignment yc = cass;
              yc[target.y] = 1;
              truth[arm] = arm_margin[arm].prob(yc) / pc;
            }
            if (skip) {
              ++report.skipped;
              continue;
            }
            for (int arm = 0; arm < 2; ++arm) {
              for (int ys = 0; ys < 2; ++ys) {
                BoundsQuery q;
                q.x = target.x;
                q.x_state = arm;
                q.y = target.y;
                q.y_state = ys;
                q.d = dass;
                q.c = cass;
                BoundsResult b;
                try {
                  b = interventional_bounds(g, t, q);
                } catch (const ZeroConditioningEvent&) {
                  ++report.skipped;
                  continue;
                } catch (const ModelFalsified& e) {
                  report.violations.push_back(SweepViolation{
                      "falsified", i, spec.seed,
                      target.x + "->" + target.y + " " + detail::describe(w) +
                          " d=" + detail::describe(dass) + " " + e.what()});
                  continue;
                }
                ++report.bound_queries;
                double tv = ys == 1 ? truth[arm] : 1.0 - truth[arm];
                double viol = std::max(b.lower - tv, tv - b.upper);
                report.max_containment_violation =
                    std::max(report.max_containment_violation, viol);
                if (viol > opts.tol)
                  report.violations.push_back(SweepViolation{
                      "containment", i, spec.seed,
                      target.x + "=" + std::to_string(arm) + "->" + target.y +
                          "=" + std::to_string(ys) + " " +
                          detail::describe(w) + " d=" + detail::describe(dass) +
                          " c=" + detail::describe(cass) + " truth=" +
                          std::to_string(tv) + " bounds=[" +
                          std::to_string(b.lower) + "," +
                          std::to_string(b.upper) + "]"});
                if (b.general && b.strengthened) {
                  double dviol =
                      std::max(b.general->lower - b.strengthened->lower,
                               b.strengthened->upper - b.general->upper);
                  report.max_dominance_violation =
                      std::max(report.max_dominance_violation, dviol);
                  if (dviol > opts.tol)
                    report.violations.push_back(SweepViolation{
                        "dominance", i, spec.seed,
                        target.x + "->" + target.y + " " +
                            detail::describe(w) + " d=" +
                            detail::describe(dass) + " c=" +
                            detail::describe(cass)});
                }
              }
            }

            // ACDE containment for the same query family
            BoundsQuery q;
            q.x = target.x;
            q.y = target.y;
            q.d = dass;
            q.c = cass;
            try {
              AcdeResult a = acde_bounds(g, t, q);
              ++report.bound_queries;
              double tv = truth[1] - truth[0];
              double viol = std::max(a.lower - tv, tv - a.upper);
              report.max_containment_violation =
                  std::max(report.max_containment_violation, viol);
              if (viol > opts.tol)
                report.violations.push_back(SweepViolation{
                    "containment", i, spec.seed,
                    "acde " + target.x + "->" + target.y + " " +
                        detail::describe(w) + " d=" + detail::describe(dass) +
                        " c=" + detail::describe(cass) + " truth=" +
                        std::to_string(tv)});
            } catch (const ZeroConditioningEvent&) {
              ++report.skipped;
            } catch (const ModelFalsified& e) {
              report.violations.push_back(
                  SweepViolation{"falsified", i, spec.seed,
                                 std::string("acde ") + e.what()});
            }
          }
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Conditioning-fix verification: the transformed model must (i) agree with
// the original on every full assignment consistent with d, (ii) obey the
// Markov property of its own (edge-deleted) graph, and (iii) preserve every
// observed margin that avoids the descendants of the fixed vertices.

struct PstarReport {
  bool ok = true;
  double max_slice_dev = 0.0;
  double max_markov_dev = 0.0;
  double max_margin_dev = 0.0;
  std::vector<std::string> failures;
};

inline PstarReport pstar_check(const DiscreteModel& m, const Assignment& d,
                               double tol = 1e-9) {
  PstarReport report;
  DiscreteModel star = fix_conditioning(m, d);
  const Dag& gs = star.graph;

  JointTable jm = joint(m);
  JointTable js = joint(star);

  // (i) cells consistent with d
  {
    const auto& vars = jm.variables();
    std::vector<int> fixed(vars.size(), -1);
    for (const auto& [name, state] : d)
      fixed[jm.var_index(name)] = state;
    std::vector<int> idx(vars.size(), 0);
    for (std::size_t flat = 0; flat < jm.cell_count(); ++flat) {
      bool consistent = true;
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (fixed[i] >= 0 && idx[i] != fixed[i]) {
          consistent = false;
          break;
        }
      if (consistent) {
        double dev = std::abs(jm.cell(idx) - js.cell(idx));
        report.max_slice_dev = std::max(report.max_slice_dev, dev);
      }
      jm.advance(idx);
    }
    if (report.max_slice_dev > tol)
      report.failures.push_back("slice agreement deviates by " +
                                std::to_string(report.max_slice_dev));
  }

  // (ii) every d-separation of the transformed graph holds in its joint
  {
    JointTable obs_margin = js.marginalize(gs.names_of(gs.observed_set()));
    std::vector<int> obs = gs.observed_set().ids();
    for (std::size_t ai = 0; ai < obs.size(); ++ai) {
      for (std::size_t bi = ai + 1; bi < obs.size(); ++bi) {
        std::vector<int> rest;
        for (int v : obs)
          if (v != obs[ai] && v != obs[bi]) rest.push_back(v);
        for (std::size_t mask = 0; mask < (1u << rest.size()); ++mask) {
          std::vector<int> cids;
          for (std::size_t k = 0; k < rest.size(); ++k)
            if (mask & (1u << k)) cids.push_back(rest[k]);
          SeparationQuery q{VertexSet({obs[ai]}), VertexSet({obs[bi]}),
                            VertexSet(cids), VertexSet{}};
          if (!d_separated(gs, q).separated) continue;
          double dev = max_ci_deviation(obs_margin, gs.name(obs[ai]),
                                        gs.name(obs[bi]), gs.names_of(VertexSet(cids)));
          report.max_markov_dev = std::max(report.max_markov_dev, dev);
          if (dev > tol)
            report.failures.push_back(
                "markov: " + gs.name(obs[ai]) + " vs " + gs.name(obs[bi]) +
                " dev " + std::to_string(dev));
        }
      }
    }
  }

  // (iii) margins over observed sets clear of the descendants of D
  {
    std::vector<std::string> dnames;
    for (const auto& [name, _] : d) dnames.push_back(name);
    VertexSet desc_d = descendants(m.graph, m.graph.vertex_set(dnames));
    std::vector<int> clear;
    for (int v : m.graph.observed_set())
      if (!desc_d.contains(v)) clear.push_back(v);
    for (std::size_t mask = 1; mask < (1u << clear.size()); ++mask) {
      std::vector<std::string> names;
      for (std::size_t k = 0; k < clear.size(); ++k)
        if (mask & (1u << k)) names.push_back(m.graph.name(clear[k]));
      JointTable pm = jm.marginalize(names);
      JointTable ps = js.marginalize(names);
      for (std::size_t cell = 0; cell < pm.cell_count(); ++cell) {
        double dev = std::abs(pm.raw()[cell] - ps.raw()[cell]);
        report.max_margin_dev = std::max(report.max_margin_dev, dev);
      }
    }
    if (report.max_margin_dev > tol)
      report.failures.push_back("margin preservation deviates by " +
                                std::to_string(report.max_margin_dev));
  }

  report.ok = report.failures.empty();
  return report;
}

}  // namespace esep
