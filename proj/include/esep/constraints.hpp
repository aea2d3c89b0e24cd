#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "esep/errors.hpp"
#include "esep/graph.hpp"
#include "esep/model.hpp"
#include "esep/separation.hpp"
#include "esep/table.hpp"

namespace esep {

// ---------------------------------------------------------------------------
// Conditional table p(x, y | z) and the instrumental inequality.

struct CondXYZ {
  int nx = 2, ny = 2, nz = 2;
  std::vector<double> p;  // [(x * ny + y) * nz + z]

  double at(int x, int y, int z) const {
    return p.at((static_cast<std::size_t>(x) * ny + y) * nz + z);
  }
  double& at(int x, int y, int z) {
    return p.at((static_cast<std::size_t>(x) * ny + y) * nz + z);
  }

  static CondXYZ from_joint(const JointTable& t, const std::string& x,
                            const std::string& y, const std::string& z,
                            double null_tol = 1e-12) {
    CondXYZ out;
    out.nx = t.states_of(x);
    out.ny = t.states_of(y);
    out.nz = t.states_of(z);
    out.p.assign(static_cast<std::size_t>(out.nx) * out.ny * out.nz, 0.0);
    for (int sz = 0; sz < out.nz; ++sz) {
      double pz = t.prob({{z, sz}});
      if (pz <= null_tol)
        throw ZeroConditioningEvent("arm " + z + "=" + std::to_string(sz) +
                                    " has near-zero probability");
      for (int sx = 0; sx < out.nx; ++sx)
        for (int sy = 0; sy < out.ny; ++sy)
          out.at(sx, sy, sz) = t.prob({{x, sx}, {y, sy}, {z, sz}}) / pz;
    }
    return out;
  }

  // Every arm must be a normalized distribution over (x, y).
  void validate(double tol = 1e-9) const {
    if (nx < 2 || ny < 2 || nz < 2 ||
        p.size() != static_cast<std::size_t>(nx) * ny * nz)
      throw QueryError("conditional table malformed");
    for (int z = 0; z < nz; ++z) {
      double sum = 0.0;
      for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
          double v = at(x, y, z);
          if (v < 0.0 || std::isnan(v))
            throw QueryError("negative or NaN entry in conditional table");
          sum += v;
        }
      if (std::abs(sum - 1.0) > tol)
        throw QueryError("arm z=" + std::to_string(z) + " sums to " +
                         std::to_string(sum));
    }
  }
};

// max over x of Σ_y max_z p(x, y | z); values above 1 are impossible for
// any distribution generated by the instrumental-variable graph.
inline double instrumental_inequality_score(const CondXYZ& p) {
  p.validate();
  double best = 0.0;
  for (int x = 0; x < p.nx; ++x) {
    double sum = 0.0;
    for (int y = 0; y < p.ny; ++y) {
      double m = 0.0;
      for (int z = 0; z < p.nz; ++z) m = std::max(m, p.at(x, y, z));
      sum += m;
    }
    best = std::max(best, sum);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Compatibility slices.
//
// The weak form holds the sub-probability matrix M[a, b] = p(a, b, d | c)
// for one fixed d; feasibility asks for a product distribution Q_A ⊗ Q_B
// dominating M entrywise.  The strong form holds M[a, b] = p(b, d | a, c)
// and asks for one B-marginal r(b) dominating every row at once.

enum class SliceForm { Weak, Strong };

struct SliceBlock {
  Assignment c;
  std::vector<double> m;        // na * nb, row-major in a
  std::vector<char> row_valid;  // strong form: rows whose conditional exists
};

struct ConditionalSlice {
  SliceForm form = SliceForm::Weak;
  std::vector<JointTable::Var> a_vars, b_vars, c_vars, d_vars;
  Assignment fixed_d;
  std::size_t na = 0, nb = 0;
  std::vector<SliceBlock> blocks;
  std::vector<Assignment> skipped_c;  // null conditioning events

  // decode a flat A (or B) index back to an assignment, for reports
  Assignment a_assignment(std::size_t ai) const { return decode(a_vars, ai); }
  Assignment b_assignment(std::size_t bi) const { return decode(b_vars, bi); }

  void validate(double slack = 1e-9) const {
    if (a_vars.empty() || b_vars.empty())
      throw QueryError("slice needs nonempty A and B parts");
    if (na != count(a_vars) || nb != count(b_vars))
      throw QueryError("slice index arity mismatch");
    for (const auto& blk : blocks) {
      if (blk.m.size() != na * nb || blk.row_valid.size() != na)
        throw QueryError("slice block malformed");
      double total = 0.0;
      for (std::size_t a = 0; a < na; ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
          double v = blk.m[a * nb + b];
          if (v < 0.0 || std::isnan(v))
            throw QueryError("negative or NaN slice entry");
          row += v;
        }
        total += row;
        // strong form: each row is a sub-probability given (a, c)
        if (form == SliceForm::Strong && blk.row_valid[a] && row > 1.0 + slack)
          throw QueryError("strong slice row exceeds mass 1");
      }
      if (form == SliceForm::Weak && total > 1.0 + slack)
        throw QueryError("weak slice exceeds mass 1");
    }
  }

  static std::size_t count(const std::vector<JointTable::Var>& vars) {
    std::size_t n = 1;
    for (const auto& v : vars) n *= static_cast<std::size_t>(v.states);
    return n;
  }

 private:
  static Assignment decode(const std::vector<JointTable::Var>& vars,
                           std::size_t flat) {
    Assignment out;
    for (std::size_t i = vars.size(); i-- > 0;) {
      out[vars[i].name] = static_cast<int>(flat % vars[i].states);
      flat /= static_cast<std::size_t>(vars[i].states);
    }
    return out;
  }
};

// Assemble a slice from an exact joint table.  Variable lists must be
// disjoint; `fixed_d` must assign exactly the D-part.  Conditioning
// assignments with p(c) ≤ null_tol are skipped and recorded.
inline ConditionalSlice make_slice(const JointTable& t,
                                   const std::vector<std::string>& a,
                                   const std::vector<std::string>& b,
                                   const std::vector<std::string>& c,
                                   const std::vector<std::string>& d,
                                   const Assignment& fixed_d, SliceForm form,
                                   double null_tol = 1e-12) {
  auto vars_of = [&](const std::vector<std::string>& names) {
    std::vector<JointTable::Var> out;
    for (const auto& n : names) out.push_back({n, t.states_of(n)});
    return out;
  };
  {
    std::map<std::string, int> seen;
    for (const auto* group : {&a, &b, &c, &d})
      for (const auto& n : *group)
        if (!seen.emplace(n, 1).second)
          throw QueryError("variable '" + n + "' used in two slice roles");
  }
  if (fixed_d.size() != d.size())
    throw QueryError("fixed_d must assign exactly the D-part");
  for (const auto& n : d)
    if (!fixed_d.count(n))
      throw QueryError("fixed_d is missing '" + n + "'");

  ConditionalSlice s;
  s.form = form;
  s.a_vars = vars_of(a);
  s.b_vars = vars_of(b);
  s.c_vars = vars_of(c);
  s.d_vars = vars_of(d);
  s.fixed_d = fixed_d;
  s.na = ConditionalSlice::count(s.a_vars);
  s.nb = ConditionalSlice::count(s.b_vars);

  std::size_t nc = ConditionalSlice::count(s.c_vars);
  auto assignment_at = [&](const std::vector<JointTable::Var>& vars,
                           std::size_t flat) {
    Assignment out;
    for (std::size_t i = vars.size(); i-- > 0;) {
      out[vars[i].name] = static_cast<int>(flat % vars[i].states);
      flat /= static_cast<std::size_t>(vars[i].states);
    }
    return out;
  };

  for (std::size_t ci = 0; ci < nc; ++ci) {
    Assignment cass = assignment_at(s.c_vars, ci);
    double pc = c.empty() ? 1.0 : t.prob(cass);
    if (pc <= null_tol) {
      s.skipped_c.push_back(cass);
      continue;
    }
    SliceBlock blk;
    blk.c = cass;
    blk.m.assign(s.na * s.nb, 0.0);
    blk.row_valid.assign(s.na, 1);
    for (std::size_t ai = 0; ai < s.na; ++ai) {
      Assignment aass = assignment_at(s.a_vars, ai);
      double denom = pc;
      if (form == SliceForm::Strong) {
        Assignment ac = aass;
        for (const auto& kv : cass) ac.insert(kv);
        denom = t.prob(ac);
        if (denom <= null_tol) {
          // row conditional p(b,d | a,c) undefined: vacuous row
          blk.row_valid[ai] = 0;
          continue;
        }
      }
      for (std::size_t bi = 0; bi < s.nb; ++bi) {
        Assignment cell = assignment_at(s.b_vars, bi);
        for (const auto& kv : aass) cell.insert(kv);
        for (const auto& kv : cass) cell.insert(kv);
        for (const auto& kv : fixed_d) cell.insert(kv);
        blk.m[ai * s.nb + bi] = t.prob(cell) / denom;
      }
    }
    s.blocks.push_back(std::move(blk));
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Compatibility verdicts.

struct BlockVerdict {
  Assignment c;
  double margin = -1.0;
  // witness marginals, filled when the block is feasible: qa over A states
  // and qb over B states for the weak form; qb alone for the strong form
  std::vector<double> qa, qb;
};

struct CompatibilityResult {
  bool feasible = true;
  double margin = -1.0;  // max over c blocks; ≤ tolerance means feasible
  std::optional<Assignment> violating_c;
  std::vector<BlockVerdict> blocks;
  std::vector<Assignment> skipped_c;
};

inline constexpr double kCompatTolerance = 1e-7;

// Σ_b max_a p(b, d | a, c) ≤ 1, per c.  A single dominating B-marginal
// r(b) ≥ p(b,d|a,c) with Σ_b r(b) = 1 exists exactly under this condition:
// the pointwise max is the least dominating function, and any leftover mass
// (1 − Σ_b max_a ...) can be spread over B freely.
inline CompatibilityResult strong_compatibility(const ConditionalSlice& s,
                                                double tol = kCompatTolerance) {
  if (s.form != SliceForm::Strong)
    throw QueryError("strong_compatibility needs a strong-form slice");
  s.validate();
  CompatibilityResult out;
  out.skipped_c = s.skipped_c;
  for (const auto& blk : s.blocks) {
    BlockVerdict v;
    v.c = blk.c;
    std::vector<double> r(s.nb, 0.0);
    for (std::size_t b = 0; b < s.nb; ++b)
      for (std::size_t a = 0; a < s.na; ++a)
        if (blk.row_valid[a]) r[b] = std::max(r[b], blk.m[a * s.nb + b]);
    double sum = 0.0;
    for (double x : r) sum += x;
    v.margin = sum - 1.0;
    if (v.margin <= tol) {
      double slack = std::max(0.0, 1.0 - sum) / static_cast<double>(s.nb);
      v.qb = r;
      for (double& x : v.qb) x += slack;
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

namespace detail {

// Objective for weak compatibility on one block: with the A-marginal fixed
// at u, the cheapest dominating B-side costs g(u) = Σ_b max_a M[a,b]/u(a)
// total mass; the block is feasible iff min g ≤ 1 over the A-simplex.
// g is convex there (each term is a max of convex functions).
struct WeakObjective {
  const std::vector<double>* m;  // active rows only, n * nb
  std::size_t n, nb;

  double operator()(const std::vector<double>& u) const {
    double total = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      double best = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        best = std::max(best, (*m)[i * nb + b] / u[i]);
      total += best;
    }
    return total;
  }

  // subgradient at u (argmax rows per b, ties to the lowest index)
  std::vector<double> subgradient(const std::vector<double>& u) const {
    std::vector<double> grad(n, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      std::size_t sel = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        double v = (*m)[i * nb + b] / u[i];
        if (v > best) {
          best = v;
          sel = i;
        }
      }
      grad[sel] -= (*m)[sel * nb + b] / (u[sel] * u[sel]);
    }
    return grad;
  }
};

inline constexpr double kSimplexFloor = 1e-12;

// Euclidean projection onto the probability simplex, then clamp away from
// the boundary (g blows up at u(a) = 0 for rows with mass).
inline void project_simplex(std::vector<double>& v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;  // largest support satisfying the KKT rule
  }
  double sum = 0.0;
  for (double& x : v) {
    x = std::max(x - theta, 0.0);
    sum += x;
  }
  if (sum <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    sum = 1.0;
  }
  for (double& x : v) x = std::max(x / sum, kSimplexFloor);
}

// Golden-section search for the minimum of a convex 1-d function.
template <class F>
double golden_min(F f, double lo, double hi, int iters = 90) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-15; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

// Pairwise mass-exchange polish: repeatedly line-search g along
// u + t(e_i − e_j), which stays on the simplex.  Each restriction of a
// convex g is convex, so golden section finds its exact minimum; sweeping
// pairs until no improvement gives machine-precision results on the small
// problems this library sees.
inline double polish_exchange(const WeakObjective& g, std::vector<double>& u,
                              double gu) {
  const std::size_t n = u.size();
  for (int sweep = 0; sweep < 60; ++sweep) {
    double before = gu;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double lo = -(u[i] - kSimplexFloor);
        double hi = u[j] - kSimplexFloor;
        if (hi - lo < 1e-14) continue;
        auto f = [&](double t) {
          std::vector<double> w = u;
          w[i] += t;
          w[j] -= t;
          return g(w);
        };
        double t = golden_min(f, lo, hi);
        double ft = f(t);
        if (ft < gu - 1e-15) {
          u[i] += t;
          u[j] -= t;
          gu = ft;
        }
      }
    }
    if (before - gu < 1e-14) break;
  }
  return gu;
}

// Dense-grid scan over the positive simplex (k_i ≥ 1, Σ k_i = grid).
// Returns the best grid point and its objective; used both as a solver
// multistart for small A and as the brute-force oracle.
inline std::pair<double, std::vector<double>> grid_scan(
    const WeakObjective& g, int grid) {
  const std::size_t n = g.n;
  const int remaining = grid - static_cast<int>(n);  // each slot keeps >= 1
  if (remaining < 0)
    throw QueryError("grid too coarse for the number of rows");
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_u;
  std::vector<double> u(n);
  if (n == 1) {
    u[0] = 1.0;
    return {g(u), u};
  }
  // odometer over extra[0..n-2] in [0, remaining]; the last slot absorbs
  // whatever is left, so only combinations with a nonnegative leftover count
  std::vector<int> extra(n, 0);
  while (true) {
    int used = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) used += extra[i];
    if (used <= remaining) {
      extra[n - 1] = remaining - used;
      for (std::size_t i = 0; i < n; ++i)
        u[i] = static_cast<double>(1 + extra[i]) / static_cast<double>(grid);
      double v = g(u);
      if (v < best) {
        best = v;
        best_u = u;
      }
    }
    std::size_t pos = 0;
    while (pos + 1 < n && ++extra[pos] > remaining) extra[pos++] = 0;
    if (pos + 1 >= n) break;
  }
  return {best, best_u};
}

// Projected subgradient descent with backtracking from one start point.
inline double descend(const WeakObjective& g, std::vector<double>& u) {
  double gu = g(u);
  double step = 0.5;
  int stale = 0;
  for (int iter = 0; iter < 400 && stale < 5; ++iter) {
    std::vector<double> grad = g.subgradient(u);
    double norm2 = 0.0;
    for (double x : grad) norm2 += x * x;
    if (norm2 < 1e-30) break;
    bool accepted = false;
    double t = step;
    for (int halving = 0; halving < 45; ++halving) {
      std::vector<double> v = u;
      double scale = t / std::sqrt(norm2);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= scale * grad[i];
      project_simplex(v);
      double gv = g(v);
      if (gv < gu - 1e-14) {
        double improved = gu - gv;
        u = std::move(v);
        gu = gv;
        accepted = true;
        step = std::min(1.0, t * 2.0);
        stale = improved < 1e-13 * std::max(1.0, gu) ? stale + 1 : 0;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return gu;
}

struct WeakBlockSolution {
  double min_g = 0.0;
  std::vector<double> u;  // over the full A index space (zeros on dropped rows)
};

inline WeakBlockSolution solve_weak_block(const SliceBlock& blk,
                                          std::size_t na, std::size_t nb,
                                          int multistarts, std::uint64_t seed) {
  // active rows: positive mass and valid
  std::vector<std::size_t> active;
  for (std::size_t a = 0; a < na; ++a) {
    if (!blk.row_valid[a]) continue;
    double mass = 0.0;
    for (std::size_t b = 0; b < nb; ++b) mass += blk.m[a * nb + b];
    if (mass > 0.0) active.push_back(a);
  }

  WeakBlockSolution sol;
  sol.u.assign(na, 0.0);
  const std::size_t n = active.size();
  if (n == 0) {
    sol.min_g = 0.0;  // nothing to dominate
    if (na > 0) sol.u[0] = 1.0;
    return sol;
  }

  std::vector<double> m(n * nb);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < nb; ++b)
      m[i * nb + b] = blk.m[active[i] * nb + b];
  WeakObjective g{&m, n, nb};

  std::vector<double> best_u;
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](std::vector<double> u) {
    double gu = descend(g, u);
    gu = polish_exchange(g, u, gu);
    if (gu < best) {
      best = gu;
      best_u = std::move(u);
    }
  };

  if (n == 1) {
    best_u.assign(1, 1.0);
    best = g(best_u);
  } else {
    consider(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    if (n <= 3) {
      auto [gv, uv] = grid_scan(g, 64);
      consider(std::move(uv));
      (void)gv;
    }
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    int deterministic = n <= 3 ? 2 : 1;
    for (int s = deterministic; s < multistarts; ++s) {
      std::vector<double> u(n);
      double sum = 0.0;
      for (double& x : u) {
        x = gamma(rng) + kSimplexFloor;
        sum += x;
      }
      for (double& x : u) x /= sum;
      consider(std::move(u));
    }
  }

  if (!std::isfinite(best))
    throw SolverFailure("weak-compatibility descent produced no finite value");
  sol.min_g = best;
  for (std::size_t i = 0; i < n; ++i) sol.u[active[i]] = best_u[i];
  return sol;
}

}  // namespace detail

struct WeakSolverOptions {
  int multistarts = 8;
  std::uint64_t seed = 0;
  double tol = kCompatTolerance;
};

// Weak compatibility: feasible iff every c-block of p(a, b, d | c) is
// dominated entrywise by some product Q_A ⊗ Q_B.  Any
// compatible distribution must put at least p(a,b,d|c) mass on each (a,b)
// cell while its (A,B)-margin factorizes; conversely a dominating product
// yields a witness by dumping the excess mass on D ≠ d cells.  Feasibility
// per block reduces to min_u g(u) ≤ 1 over the A-simplex.
inline CompatibilityResult weak_compatibility(
    const ConditionalSlice& s, const WeakSolverOptions& opts = {}) {
  if (s.form != SliceForm::Weak)
    throw QueryError("weak_compatibility needs a weak-form slice");
  s.validate();
  CompatibilityResult out;
  out.skipped_c = s.skipped_c;
  for (const auto& blk : s.blocks) {
    detail::WeakBlockSolution sol =
        detail::solve_weak_block(blk, s.na, s.nb, opts.multistarts, opts.seed);
    BlockVerdict v;
    v.c = blk.c;
    v.margin = sol.min_g - 1.0;
    if (v.margin <= opts.tol) {
      v.qa = sol.u;
      // cheapest dominating B-side for the found u, plus uniform slack
      std::vector<double> r(s.nb, 0.0);
      for (std::size_t b = 0; b < s.nb; ++b)
        for (std::size_t a = 0; a < s.na; ++a)
          if (sol.u[a] > 0.0)
            r[b] = std::max(r[b], blk.m[a * s.nb + b] / sol.u[a]);
      double sum = 0.0;
      for (double x : r) sum += x;
      double slack = std::max(0.0, 1.0 - sum) / static_cast<double>(s.nb);
      for (double& x : r) x += slack;
      v.qb = std::move(r);
    }
    out.blocks.push_back(std::move(v));
  }
  out.margin = -1.0;
  for (const auto& v : out.blocks)
    if (v.margin > out.margin) {
      out.margin = v.margin;
      if (v.margin > opts.tol) out.violating_c = v.c;
    }
  out.feasible = out.margin <= opts.tol;
  if (out.feasible) out.violating_c.reset();
  return out;
}

// ---------------------------------------------------------------------------
// Witness discovery.

struct TestablePair {
  std::string x, y;
  std::vector<std::string> d;  // all other observed vertices
};

// All ordered observed pairs that are non-adjacent and share no latent
// parent, each with the whole-remainder deletion set.  The e-separation
// claim is re-verified rather than trusted.
inline std::vector<TestablePair> testable_pairs(const Dag& g) {
  std::vector<TestablePair> out;
  const VertexSet obs = g.observed_set();
  for (int x : obs) {
    for (int y : obs) {
      if (x == y || g.adjacent(x, y)) continue;
      bool shared_latent = false;
      for (int p : g.parents(x))
        if (!g.observed(p) &&
            std::binary_search(g.parents(y).begin(), g.parents(y).end(), p))
          shared_latent = true;
      if (shared_latent) continue;
      VertexSet d = set_minus(obs, VertexSet({x, y}));
      SeparationQuery q{VertexSet({x}), VertexSet({y}), VertexSet{}, d};
      if (!e_separated(g, q).separated)
        throw Error("internal: remainder deletion failed to e-separate " +
                    g.name(x) + " and " + g.name(y));
      out.push_back(TestablePair{g.name(x), g.name(y), g.names_of(d)});
    }
  }
  return out;
}

struct EsepWitness {
  std::vector<std::string> a, b, c, d;
  bool strong = false;    // no vertex of a descends from d
  bool equality = false;  // d empty: plain conditional independence
};

// All (C, D) pairs over the observed vertices other than {x, y} such that
// x and y are e-separated given C after deleting D and C avoids the
// descendants of D, capped at the given sizes, sorted by (|D|, |C|, lex)
// and filtered to inclusion-minimal D per C.
inline std::vector<EsepWitness> enumerate_witnesses(
    const Dag& g, const std::string& x, const std::string& y,
    std::size_t max_c = SIZE_MAX, std::size_t max_d = SIZE_MAX) {
  int xi = g.index_of(x);
  int yi = g.index_of(y);
  if (!g.observed(xi) || !g.observed(yi))
    throw QueryError("witness endpoints must be observed");
  if (xi == yi) throw QueryError("witness endpoints must differ");
  if (g.adjacent(xi, yi))
    throw QueryError("'" + x + "' and '" + y + "' are adjacent");

  std::vector<int> rest;
  for (int v : g.observed_set())
    if (v != xi && v != yi) rest.push_back(v);

  struct Raw {
    std::vector<int> c, d;
    bool strong;
  };
  std::vector<Raw> found;

  std::vector<int> role(rest.size(), 0);  // 0 = out, 1 = C, 2 = D
  const std::size_t total = rest.size();
  while (true) {
    std::vector<int> c_ids, d_ids;
    for (std::size_t i = 0; i < total; ++i) {
      if (role[i] == 1) c_ids.push_back(rest[i]);
      if (role[i] == 2) d_ids.push_back(rest[i]);
    }
    if (c_ids.size() <= max_c && d_ids.size() <= max_d) {
      VertexSet c(c_ids), d(d_ids);
      VertexSet desc_d = descendants(g, d);
      bool c_ok = set_intersect(c, desc_d).empty();
      if (c_ok) {
        SeparationQuery q{VertexSet({xi}), VertexSet({yi}), c, d};
        if (e_separated(g, q).separated)
          found.push_back(Raw{c_ids, d_ids, !desc_d.contains(xi)});
      }
    }
    std::size_t pos = 0;
    while (pos < total && ++role[pos] == 3) role[pos++] = 0;
    if (pos == total) break;
  }

  std::sort(found.begin(), found.end(), [](const Raw& a, const Raw& b) {
    if (a.d.size() != b.d.size()) return a.d.size() < b.d.size();
    if (a.c.size() != b.c.size()) return a.c.size() < b.c.size();
    if (a.d != b.d) return a.d < b.d;
    return a.c < b.c;
  });

  // inclusion-minimal D per C
  auto subset = [](const std::vector<int>& s, const std::vector<int>& t) {
    return std::includes(t.begin(), t.end(), s.begin(), s.end());
  };
  std::vector<EsepWitness> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    bool minimal = true;
    for (std::size_t j = 0; j < found.size() && minimal; ++j)
      if (j != i && found[j].c == found[i].c &&
          found[j].d.size() < found[i].d.size() &&
          subset(found[j].d, found[i].d))
        minimal = false;
    if (!minimal) continue;
    EsepWitness w;
    w.a = {x};
    w.b = {y};
    w.c = g.names_of(VertexSet(found[i].c));
    w.d = g.names_of(VertexSet(found[i].d));
    w.strong = found[i].strong;
    w.equality = found[i].d.empty();
    out.push_back(std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-distribution falsification check.

struct SliceCheck {
  EsepWitness witness;
  Assignment d;
  SliceForm form = SliceForm::Weak;
  CompatibilityResult result;
};

struct CheckReport {
  bool all_feasible = true;
  double max_margin = -1.0;
  std::vector<SliceCheck> checks;
  std::size_t skipped_slices = 0;  // null conditioning events
};

// Evaluate every witness at every assignment of its D-part, using the
// strong form when the witness allows it and the weak form otherwise.
inline CheckReport check_distribution(const Dag& g, const JointTable& t,
                                      const std::vector<EsepWitness>& witnesses,
                                      const WeakSolverOptions& opts = {}) {
  // the table must cover exactly the observed vertices, with matching arity
  const VertexSet obs = g.observed_set();
  if (t.variables().size() != obs.size())
    throw QueryError("table variables do not match the observed vertices");
  for (int v : obs) {
    if (!t.has_variable(g.name(v)))
      throw QueryError("table is missing observed vertex '" + g.name(v) + "'");
    if (g.states(v) != 0 && t.states_of(g.name(v)) != g.states(v))
      throw QueryError("state count for '" + g.name(v) +
                       "' disagrees with the graph");
  }

  CheckReport report;
  for (const auto& w : witnesses) {
    std::vector<JointTable::Var> dvars;
    for (const auto& n : w.d) dvars.push_back({n, t.states_of(n)});
    std::size_t nd = ConditionalSlice::count(dvars);
    for (std::size_t di = 0; di < nd; ++di) {
      Assignment dass;
      std::size_t flat = di;
      for (std::size_t i = dvars.size(); i-- > 0;) {
        dass[dvars[i].name] = static_cast<int>(flat % dvars[i].states);
        flat /= static_cast<std::size_t>(dvars[i].states);
      }
      SliceCheck chk;
      chk.witness = w;
      chk.d = dass;
      chk.form = w.strong ? SliceForm::Strong : SliceForm::Weak;
      ConditionalSlice slice =
          make_slice(t, w.a, w.b, w.c, w.d, dass, chk.form);
      report.skipped_slices += slice.skipped_c.size();
      chk.result = chk.form == SliceForm::Strong
                       ? strong_compatibility(slice, opts.tol)
                       : weak_compatibility(slice, opts);
      report.max_margin = std::max(report.max_margin, chk.result.margin);
      if (!chk.result.feasible) report.all_feasible = false;
      report.checks.push_back(std::move(chk));
    }
  }
  return report;
}

}  // namespace esep
