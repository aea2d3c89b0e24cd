#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "esep/errors.hpp"

namespace esep {

// Partial assignment of states to named variables.  std::map keeps the keys
// sorted, which makes reports and serialized records deterministic.
using Assignment = std::map<std::string, int>;

// Dense table of probabilities over a fixed, ordered list of finite
// variables.  Storage is row-major in variable order: the first variable is
// the slowest index, the last the fastest.
class JointTable {
 public:
  struct Var {
    std::string name;
    int states = 2;
  };

  JointTable() = default;

  explicit JointTable(std::vector<Var> vars) : vars_(std::move(vars)) {
    std::size_t cells = 1;
    for (const auto& v : vars_) {
      if (v.name.empty()) throw QueryError("empty variable name");
      if (v.states < 2)
        throw QueryError("variable '" + v.name + "' needs at least 2 states");
      if (!index_.emplace(v.name, index_.size()).second)
        throw QueryError("duplicate variable '" + v.name + "'");
      cells *= static_cast<std::size_t>(v.states);
    }
    p_.assign(cells, 0.0);
  }

  const std::vector<Var>& variables() const { return vars_; }
  std::size_t cell_count() const { return p_.size(); }
  bool has_variable(const std::string& name) const {
    return index_.count(name) != 0;
  }
  int states_of(const std::string& name) const {
    return vars_[var_index(name)].states;
  }

  double& cell(const std::vector<int>& full) { return p_[offset(full)]; }
  double cell(const std::vector<int>& full) const { return p_[offset(full)]; }
  const std::vector<double>& raw() const { return p_; }
  std::vector<double>& raw() { return p_; }

  double mass() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

  // Probability of a partial assignment: sum over all consistent cells.
  // Unknown variables are rejected rather than ignored — silently
  // broadcasting over a typo'd name hides query bugs.
  double prob(const Assignment& partial) const {
    std::vector<int> fixed(vars_.size(), -1);
    bind(partial, fixed);
    double total = 0.0;
    std::vector<int> idx(vars_.size(), 0);
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
      bool ok = true;
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (fixed[i] >= 0 && idx[i] != fixed[i]) {
          ok = false;
          break;
        }
      if (ok) total += p_[flat];
      advance(idx);
    }
    return total;
  }

  // Keep only `keep` (order follows this table, not the argument), summing
  // out everything else.
  JointTable marginalize(const std::vector<std::string>& keep) const {
    std::vector<char> keep_mask(vars_.size(), 0);
    for (const auto& name : keep) keep_mask[var_index(name)] = 1;
    std::vector<Var> kept;
    std::vector<std::size_t> kept_pos;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (keep_mask[i]) {
        kept.push_back(vars_[i]);
        kept_pos.push_back(i);
      }
    JointTable out(kept);
    std::vector<int> idx(vars_.size(), 0);
    std::vector<int> sub(kept.size(), 0);
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
      for (std::size_t k = 0; k < kept_pos.size(); ++k)
        sub[k] = idx[kept_pos[k]];
      out.cell(sub) += p_[flat];
      advance(idx);
    }
    return out;
  }

  // Condition on `on` and drop the conditioned variables.  The remaining
  // table is renormalized; an event of probability <= null_tol is an error.
  JointTable condition(const Assignment& on, double null_tol = 1e-12) const {
    std::vector<int> fixed(vars_.size(), -1);
    bind(on, fixed);
    std::vector<Var> kept;
    std::vector<std::size_t> kept_pos;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (fixed[i] < 0) {
        kept.push_back(vars_[i]);
        kept_pos.push_back(i);
      }
    JointTable out(kept);
    double mass = 0.0;
    std::vector<int> idx(vars_.size(), 0);
    std::vector<int> sub(kept.size(), 0);
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
      bool ok = true;
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (fixed[i] >= 0 && idx[i] != fixed[i]) {
          ok = false;
          break;
        }
      if (ok) {
        for (std::size_t k = 0; k < kept_pos.size(); ++k)
          sub[k] = idx[kept_pos[k]];
        out.cell(sub) += p_[flat];
        mass += p_[flat];
      }
      advance(idx);
    }
    if (mass <= null_tol)
      throw ZeroConditioningEvent("conditioning event has probability " +
                                  std::to_string(mass));
    for (double& x : out.p_) x /= mass;
    return out;
  }

  // Nonnegative cells, total mass 1 within tolerance.
  void validate(double mass_tol = 1e-9) const {
    for (double x : p_)
      if (x < 0.0 || std::isnan(x))
        throw QueryError("negative or NaN probability in table");
    if (std::abs(mass() - 1.0) > mass_tol)
      throw QueryError("table mass " + std::to_string(mass()) +
                       " is not 1 within tolerance");
  }

  // Odometer over the table's full assignments, last variable fastest.
  void advance(std::vector<int>& idx) const {
    for (std::size_t i = vars_.size(); i-- > 0;) {
      if (++idx[i] < vars_[i].states) return;
      idx[i] = 0;
    }
  }

  std::size_t var_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
      throw QueryError("table has no variable '" + name + "'");
    return it->second;
  }

 private:
  void bind(const Assignment& partial, std::vector<int>& fixed) const {
    for (const auto& [name, state] : partial) {
      std::size_t i = var_index(name);
      if (state < 0 || state >= vars_[i].states)
        throw QueryError("state " + std::to_string(state) +
                         " out of range for variable '" + name + "'");
      fixed[i] = state;
    }
  }

  std::size_t offset(const std::vector<int>& full) const {
    if (full.size() != vars_.size())
      throw QueryError("assignment arity does not match table");
    std::size_t off = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (full[i] < 0 || full[i] >= vars_[i].states)
        throw QueryError("state out of range for variable '" + vars_[i].name +
                         "'");
      off = off * static_cast<std::size_t>(vars_[i].states) +
            static_cast<std::size_t>(full[i]);
    }
    return off;
  }

  std::vector<Var> vars_;
  std::map<std::string, std::size_t> index_;
  std::vector<double> p_;
};

inline JointTable marginalize(const JointTable& t,
                              const std::vector<std::string>& keep) {
  return t.marginalize(keep);
}

inline JointTable condition(const JointTable& t, const Assignment& on,
                            double null_tol = 1e-12) {
  return t.condition(on, null_tol);
}

// ---------------------------------------------------------------------------
// Distribution text format: a header line naming the variables plus a final
// `p` column, then one row per cell.  Missing rows are zero.  The column
// totals must come to 1 within 1e-6; the loaded table is renormalized to
// exact mass 1 (flagged so callers can warn).

struct LoadedTable {
  JointTable table;
  bool renormalized = false;  // input mass differed from 1 beyond 1e-15
};

// `states_of(name)` supplies each variable's state count (e.g. from a graph
// or from scanning); here the count is inferred as max(seen state + 1, 2)
// unless the caller passes explicit counts.
inline LoadedTable load_table(std::istream& in,
                              const std::map<std::string, int>& states = {}) {
  std::string line;
  std::size_t lineno = 0;

  // header
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    for (std::string t; ls >> t;) header.push_back(t);
    if (!header.empty()) break;
  }
  if (header.size() < 2 || header.back() != "p")
    throw ParseError(lineno,
                     "header must list variable names followed by 'p'");
  header.pop_back();
  {
    std::map<std::string, int> seen;
    for (const auto& h : header)
      if (!seen.emplace(h, 1).second)
        throw ParseError(lineno, "duplicate column '" + h + "'");
  }

  struct Row {
    std::vector<int> states;
    double p;
    std::size_t lineno;
  };
  std::vector<Row> rows;
  std::vector<int> max_state(header.size(), 1);
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != header.size() + 1)
      throw ParseError(lineno, "expected " + std::to_string(header.size() + 1) +
                                   " columns, got " + std::to_string(tok.size()));
    Row r;
    r.lineno = lineno;
    for (std::size_t i = 0; i < header.size(); ++i) {
      try {
        std::size_t used = 0;
        int s = std::stoi(tok[i], &used);
        if (used != tok[i].size() || s < 0) throw std::invalid_argument(tok[i]);
        r.states.push_back(s);
        max_state[i] = std::max(max_state[i], s);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad state '" + tok[i] + "' in column '" +
                                     header[i] + "'");
      }
    }
    try {
      std::size_t used = 0;
      r.p = std::stod(tok.back(), &used);
      if (used != tok.back().size()) throw std::invalid_argument(tok.back());
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad probability '" + tok.back() + "'");
    }
    if (r.p < 0.0)
      throw ParseError(lineno, "negative probability " + tok.back());
    rows.push_back(std::move(r));
  }

  std::vector<JointTable::Var> vars;
  for (std::size_t i = 0; i < header.size(); ++i) {
    int k;
    if (auto it = states.find(header[i]); it != states.end()) {
      k = it->second;
      if (max_state[i] >= k)
        throw ParseError("state " + std::to_string(max_state[i]) +
                         " out of range for variable '" + header[i] +
                         "' with " + std::to_string(k) + " states");
    } else {
      k = std::max(max_state[i] + 1, 2);
    }
    vars.push_back({header[i], k});
  }

  JointTable t(vars);
  std::vector<char> filled(t.cell_count(), 0);
  for (const auto& r : rows) {
    // duplicate rows are almost certainly a mistake in hand-written tables
    std::size_t off = 0;
    for (std::size_t i = 0; i < vars.size(); ++i)
      off = off * vars[i].states + r.states[i];
    if (filled[off])
      throw ParseError(r.lineno, "duplicate row");
    filled[off] = 1;
    t.cell(r.states) = r.p;
  }

  double mass = t.mass();
  if (std::abs(mass - 1.0) > 1e-6)
    throw ParseError("table mass " + std::to_string(mass) +
                     " differs from 1 by more than 1e-6");
  bool renorm = std::abs(mass - 1.0) > 1e-15;
  if (mass > 0.0)
    for (double& x : t.raw()) x /= mass;
  return LoadedTable{std::move(t), renorm};
}

inline LoadedTable load_table_text(std::string_view text,
                                   const std::map<std::string, int>& states = {}) {
  std::istringstream in{std::string(text)};
  return load_table(in, states);
}

// Writes a table in the same format (all rows, including zeros, in
// row-major order).
inline void save_table(std::ostream& out, const JointTable& t) {
  for (const auto& v : t.variables()) out << v.name << ' ';
  out << "p\n";
  std::vector<int> idx(t.variables().size(), 0);
  out << std::setprecision(17);
  for (std::size_t flat = 0; flat < t.cell_count(); ++flat) {
    for (int s : idx) out << s << ' ';
    out << t.cell(idx) << '\n';
    t.advance(idx);
  }
}

}  // namespace esep
