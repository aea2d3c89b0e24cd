// esep — command-line surface for the e-separation library.
//
// Exit codes: 0 success, 1 usage or file-parse error, 2 precondition
// violation (the failed condition is named on stderr), 3 falsification
// finding (infeasible slice, violated inequality, empty bounds, sweep
// violations).  Falsification is deliberately distinct from error: with a
// correct invocation it means the data rejects the model, not the tooling.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "esep/esep.hpp"

namespace {

using esep::Record;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw esep::ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

esep::Dag load_graph(const std::string& path) {
  return esep::parse_graph(read_file(path));
}

esep::LoadedTable load_table_file(const std::string& path,
                                  const esep::Dag* g) {
  std::ifstream in(path);
  if (!in) throw esep::ParseError("cannot open '" + path + "'");
  std::map<std::string, int> states;
  if (g)
    for (int v : g->observed_set())
      if (g->states(v) != 0) states[g->name(v)] = g->states(v);
  return esep::load_table(in, states);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::pair<std::string, int> parse_assignment(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0)
    throw esep::ParseError("assignment '" + s + "' is not of the form X=1");
  std::string name = s.substr(0, eq);
  std::string val = s.substr(eq + 1);
  std::size_t used = 0;
  int state = 0;
  try {
    state = std::stoi(val, &used);
  } catch (const std::exception&) {
    throw esep::ParseError("assignment '" + s + "' has a non-numeric state");
  }
  if (used != val.size() || state < 0)
    throw esep::ParseError("assignment '" + s + "' has an invalid state");
  return {name, state};
}

esep::Assignment parse_assignments(const std::vector<std::string>& items) {
  esep::Assignment out;
  for (const auto& s : items) {
    auto [name, state] = parse_assignment(s);
    if (!out.emplace(name, state).second)
      throw esep::ParseError("duplicate assignment for '" + name + "'");
  }
  return out;
}

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

std::string show(const esep::Assignment& a) {
  std::string out;
  bool first = true;
  for (const auto& [k, v] : a) {
    if (!first) out += ", ";
    out += k + "=" + std::to_string(v);
    first = false;
  }
  return out.empty() ? "-" : out;
}

void emit(const Record& r) { std::cout << r.dump(2) << "\n"; }

// ---------------------------------------------------------------------------

struct SepArgs {
  std::string graph;
  std::string a, b, c, d;
  std::string format = "text";
};

int run_dsep(const SepArgs& args) {
  esep::Dag g = load_graph(args.graph);
  esep::SeparationQuery q;
  q.a = g.vertex_set(split_list(args.a));
  q.b = g.vertex_set(split_list(args.b));
  q.c = g.vertex_set(split_list(args.c));
  esep::SeparationVerdict v = esep::d_separated(g, q);
  if (args.format == "records") {
    Record r;
    r["subcommand"] = "dsep";
    r["a"] = split_list(args.a);
    r["b"] = split_list(args.b);
    r["c"] = split_list(args.c);
    r["verdict"] = v;
    emit(r);
  } else if (v.separated) {
    std::cout << "d-separated\n";
  } else {
    std::cout << "d-connected (witness path: " << join(*v.witness_path, " - ")
              << ")\n";
  }
  return 0;
}

int run_esep(const SepArgs& args) {
  esep::Dag g = load_graph(args.graph);
  esep::SeparationQuery q;
  q.a = g.vertex_set(split_list(args.a));
  q.b = g.vertex_set(split_list(args.b));
  q.c = g.vertex_set(split_list(args.c));
  q.d = g.vertex_set(split_list(args.d));
  esep::SeparationVerdict sub = esep::e_separated(g, q);
  esep::SeparationVerdict star = esep::e_separated_star(g, q);
  if (sub.separated != star.separated)
    throw esep::Error("internal: e-separation characterizations disagree");
  if (args.format == "records") {
    Record r;
    r["subcommand"] = "esep";
    r["a"] = split_list(args.a);
    r["b"] = split_list(args.b);
    r["c"] = split_list(args.c);
    r["d"] = split_list(args.d);
    r["agree"] = true;
    r["verdict"] = sub;
    emit(r);
  } else if (sub.separated) {
    std::cout << "e-separated (both characterizations agree)\n";
  } else {
    std::cout << "not e-separated (both characterizations agree); witness"
              << " path: " << join(*sub.witness_path, " - ") << "\n";
  }
  return 0;
}

struct FindArgs {
  std::string graph;
  std::string a, b;
  std::size_t max_c = SIZE_MAX;
  std::size_t max_d = SIZE_MAX;
  std::string format = "text";
};

int run_find(const FindArgs& args) {
  esep::Dag g = load_graph(args.graph);

  struct PairWitnesses {
    std::string x, y;
    std::vector<esep::EsepWitness> list;
  };
  std::vector<esep::TestablePair> pairs;
  std::vector<PairWitnesses> found;

  if (!args.a.empty() || !args.b.empty()) {
    if (args.a.empty() || args.b.empty())
      throw esep::QueryError("find needs both -A and -B or neither");
    found.push_back(
        {args.a, args.b,
         esep::enumerate_witnesses(g, args.a, args.b, args.max_c,
                                   args.max_d)});
  } else {
    pairs = esep::testable_pairs(g);
    for (int x : g.observed_set())
      for (int y : g.observed_set()) {
        if (x == y || g.adjacent(x, y)) continue;
        found.push_back({g.name(x), g.name(y),
                         esep::enumerate_witnesses(g, g.name(x), g.name(y),
                                                   args.max_c, args.max_d)});
      }
  }

  if (args.format == "records") {
    Record r;
    r["subcommand"] = "find";
    r["pairs"] = pairs;
    Record w = Record::array();
    for (const auto& pw : found)
      w.push_back(Record{{"x", pw.x}, {"y", pw.y}, {"witnesses", pw.list}});
    r["witnesses"] = w;
    emit(r);
    return 0;
  }

  if (args.a.empty()) {
    std::cout << "testable pairs (all observed variables deleted but the"
              << " endpoints):\n";
    for (const auto& p : pairs)
      std::cout << "  " << p.x << " vs " << p.y << "  after deleting {"
                << join(p.d, ",") << "}\n";
  }
  for (const auto& pw : found) {
    std::cout << pw.x << " vs " << pw.y << ":\n";
    for (const auto& w : pw.list) {
      std::cout << "  C={" << join(w.c, ",") << "} D={" << join(w.d, ",")
                << "}";
      if (w.strong) std::cout << "  strong form";
      if (w.equality) std::cout << "  equality constraint";
      std::cout << "\n";
    }
    if (pw.list.empty()) std::cout << "  (no witnesses)\n";
  }
  return 0;
}

struct CheckArgs {
  std::string graph, table;
  std::string a, b;
  std::size_t max_c = SIZE_MAX;
  std::size_t max_d = SIZE_MAX;
  int multistarts = 8;
  std::uint64_t seed = 0;
  double tol = esep::kCompatTolerance;
  int grid = 0;  // > 0: verdicts from the grid oracle instead of the solver
  std::string format = "text";
};

int run_check(const CheckArgs& args) {
  esep::Dag g = load_graph(args.graph);
  esep::LoadedTable lt = load_table_file(args.table, &g);

  std::vector<esep::EsepWitness> witnesses;
  if (!args.a.empty() || !args.b.empty()) {
    if (args.a.empty() || args.b.empty())
      throw esep::QueryError("check needs both -A and -B or neither");
    witnesses =
        esep::enumerate_witnesses(g, args.a, args.b, args.max_c, args.max_d);
  } else {
    for (int x : g.observed_set())
      for (int y : g.observed_set()) {
        if (x == y || g.adjacent(x, y)) continue;
        auto ws = esep::enumerate_witnesses(g, g.name(x), g.name(y),
                                            args.max_c, args.max_d);
        witnesses.insert(witnesses.end(), ws.begin(), ws.end());
      }
  }

  esep::CheckReport report;
  if (args.grid > 0) {
    // oracle mode: same slices, verdicts by exhaustive grid search
    for (const auto& w : witnesses) {
      std::vector<esep::JointTable::Var> dvars;
      for (const auto& n : w.d)
        dvars.push_back({n, lt.table.states_of(n)});
      std::size_t nd = esep::ConditionalSlice::count(dvars);
      for (std::size_t di = 0; di < nd; ++di) {
        esep::Assignment dass;
        std::size_t flat = di;
        for (std::size_t i = dvars.size(); i-- > 0;) {
          dass[dvars[i].name] = static_cast<int>(flat % dvars[i].states);
          flat /= static_cast<std::size_t>(dvars[i].states);
        }
        esep::SliceCheck chk;
        chk.witness = w;
        chk.d = dass;
        chk.form = w.strong ? esep::SliceForm::Strong : esep::SliceForm::Weak;
        esep::ConditionalSlice slice =
            esep::make_slice(lt.table, w.a, w.b, w.c, w.d, dass, chk.form);
        report.skipped_slices += slice.skipped_c.size();
        chk.result = esep::brute_force_compat(slice, args.grid, args.tol);
        report.max_margin = std::max(report.max_margin, chk.result.margin);
        if (!chk.result.feasible) report.all_feasible = false;
        report.checks.push_back(std::move(chk));
      }
    }
  } else {
    esep::WeakSolverOptions opts;
    opts.multistarts = args.multistarts;
    opts.seed = args.seed;
    opts.tol = args.tol;
    report = esep::check_distribution(g, lt.table, witnesses, opts);
  }

  if (args.format == "records") {
    Record r;
    r["subcommand"] = "check";
    r["renormalized"] = lt.renormalized;
    r["oracle_grid"] = args.grid;
    r["report"] = report;
    emit(r);
  } else {
    if (lt.renormalized)
      std::cout << "note: table mass differed from 1; renormalized\n";
    for (const auto& chk : report.checks) {
      std::cout << (chk.result.feasible ? "feasible  " : "INFEASIBLE")
                << "  C={" << join(chk.witness.c, ",") << "} D={"
                << join(chk.witness.d, ",") << "} d={" << show(chk.d) << "}"
                << "  " << (chk.form == esep::SliceForm::Strong ? "strong"
                                                                : "weak")
                << "  margin " << std::setprecision(9) << chk.result.margin;
      if (chk.result.violating_c)
        std::cout << "  at c={" << show(*chk.result.violating_c) << "}";
      std::cout << "\n";
    }
    std::cout << (report.all_feasible ? "all slices feasible"
                                      : "model falsified")
              << "; max margin " << std::setprecision(9) << report.max_margin
              << "; slices " << report.checks.size() << "; skipped "
              << report.skipped_slices << "\n";
  }
  return report.all_feasible ? 0 : 3;
}

struct IvArgs {
  std::string table;
  std::string graph;
  std::string x = "X", y = "Y", z = "Z";
  double tol = esep::kCompatTolerance;
  std::string format = "text";
};

int run_iv(const IvArgs& args) {
  std::optional<esep::Dag> g;
  if (!args.graph.empty()) g = load_graph(args.graph);
  esep::LoadedTable lt =
      load_table_file(args.table, g ? &*g : nullptr);
  esep::CondXYZ p =
      esep::CondXYZ::from_joint(lt.table, args.x, args.y, args.z);
  double score = esep::instrumental_inequality_score(p);
  bool violated = score > 1.0 + args.tol;

  std::vector<esep::AcdeResult> acde;
  if (p.nx == 2 && p.ny == 2)
    for (int x = 0; x < 2; ++x) acde.push_back(esep::iv_acde_bounds(p, x));

  if (args.format == "records") {
    Record r;
    r["subcommand"] = "iv";
    r["score"] = score;
    r["violated"] = violated;
    Record arr = Record::array();
    for (std::size_t x = 0; x < acde.size(); ++x)
      arr.push_back(Record{{"x", x},
                           {"lower", acde[x].lower},
                           {"upper", acde[x].upper}});
    r["acde"] = arr;
    emit(r);
  } else {
    std::cout << "instrumental inequality score: " << std::fixed
              << std::setprecision(4) << score
              << (violated ? "  (violated: score exceeds 1)" : "  (satisfied)")
              << "\n";
    std::cout.unsetf(std::ios::fixed);
    for (std::size_t x = 0; x < acde.size(); ++x)
      std::cout << "ACDE holding " << args.x << "=" << x << ": ["
                << std::setprecision(9) << acde[x].lower << ", "
                << acde[x].upper << "]\n";
  }
  return violated ? 3 : 0;
}

struct BoundsArgs {
  std::string graph, table;
  std::string do_arg, outcome_arg;
  std::vector<std::string> fix, given;
  std::string variant = "auto";
  bool acde = false;
  std::string format = "text";
};

int run_bounds(const BoundsArgs& args) {
  esep::Dag g = load_graph(args.graph);
  esep::LoadedTable lt = load_table_file(args.table, &g);

  esep::BoundsQuery q;
  std::tie(q.x, q.x_state) = parse_assignment(args.do_arg);
  std::tie(q.y, q.y_state) = parse_assignment(args.outcome_arg);
  q.d = parse_assignments(args.fix);
  q.c = parse_assignments(args.given);
  if (args.variant == "auto")
    q.variant = esep::BoundsVariant::Auto;
  else if (args.variant == "general")
    q.variant = esep::BoundsVariant::General;
  else if (args.variant == "strengthened")
    q.variant = esep::BoundsVariant::Strengthened;
  else
    throw esep::ParseError("unknown variant '" + args.variant + "'");

  bool falsified = false;
  std::string falsified_why;
  esep::BoundsResult res;
  try {
    res = esep::interventional_bounds(g, lt.table, q);
  } catch (const esep::ModelFalsified& e) {
    falsified = true;
    falsified_why = e.what();
  }

  std::optional<esep::AcdeResult> acde;
  if (args.acde && !falsified) acde = esep::acde_bounds(g, lt.table, q);

  if (args.format == "records") {
    Record r;
    r["subcommand"] = "bounds";
    r["query"] = Record{{"x", q.x},
                        {"x_state", q.x_state},
                        {"y", q.y},
                        {"y_state", q.y_state},
                        {"d", q.d},
                        {"c", q.c},
                        {"variant", args.variant}};
    r["falsified"] = falsified;
    if (falsified)
      r["why"] = falsified_why;
    else
      r["result"] = res;
    r["acde"] = acde ? Record(*acde) : Record(nullptr);
    emit(r);
  } else if (falsified) {
    std::cout << "model falsified: " << falsified_why << "\n";
  } else {
    std::cout << "p(" << q.y << "=" << q.y_state << " | do(" << q.x << "="
              << q.x_state;
    if (!q.d.empty()) std::cout << ", " << show(q.d);
    std::cout << ")";
    if (!q.c.empty()) std::cout << ", " << show(q.c);
    std::cout << ") in [" << std::setprecision(9) << res.lower << ", "
              << res.upper << "]  via " << res.variant_used << "\n";
    if (res.general)
      std::cout << "  general:      [" << res.general->lower << ", "
                << res.general->upper << "]\n";
    if (res.strengthened)
      std::cout << "  strengthened: [" << res.strengthened->lower << ", "
                << res.strengthened->upper << "]\n";
    else if (!res.strengthened_admissible)
      std::cout << "  strengthened form not admissible (treatment descends"
                << " from the deletion set)\n";
    if (acde)
      std::cout << "ACDE in [" << acde->lower << ", " << acde->upper << "]"
                << (acde->includes_zero ? "  (includes zero)" : "") << "\n";
  }
  return falsified ? 3 : 0;
}

struct SweepArgs {
  std::string graph;
  int models = 100;
  std::uint64_t seed = 0;
  int latent_states = 4;
  double concentration = 1.0;
  std::size_t max_c = SIZE_MAX;
  std::size_t max_d = SIZE_MAX;
  double tol = 1e-9;
  std::string format = "text";
};

int run_sweep(const SweepArgs& args) {
  esep::Dag g = load_graph(args.graph);
  esep::SweepOptions opts;
  opts.latent_states = args.latent_states;
  opts.concentration = args.concentration;
  opts.max_c = args.max_c;
  opts.max_d = args.max_d;
  opts.tol = args.tol;
  esep::SweepReport report =
      esep::soundness_sweep(g, args.models, args.seed, opts);

  if (args.format == "records") {
    Record r;
    r["subcommand"] = "sweep";
    r["seed"] = args.seed;
    r["report"] = report;
    emit(r);
  } else {
    std::cout << "models " << report.n_models << "; compatibility slices "
              << report.compat_slices << "; bound queries "
              << report.bound_queries << "; skipped " << report.skipped
              << "\n";
    std::cout << std::setprecision(9) << "max compatibility margin "
              << report.max_compat_margin << "; max containment violation "
              << report.max_containment_violation
              << "; max dominance violation "
              << report.max_dominance_violation << "\n";
    if (report.violations.empty()) {
      std::cout << "zero violations\n";
    } else {
      std::cout << report.violations.size() << " violations:\n";
      for (const auto& v : report.violations)
        std::cout << "  [" << v.kind << "] model " << v.model_index
                  << " seed " << v.model_seed << ": " << v.detail << "\n";
    }
  }
  return report.violations.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"e-separation constraints and causal-effect bounds"};
  app.require_subcommand(1);

  SepArgs dsep_args;
  CLI::App* dsep = app.add_subcommand(
      "dsep", "d-separation verdict with a witness path when connected");
  dsep->add_option("-g,--graph", dsep_args.graph, "graph file")->required();
  dsep->add_option("-A", dsep_args.a, "left vertex set, comma-separated")
      ->required();
  dsep->add_option("-B", dsep_args.b, "right vertex set")->required();
  dsep->add_option("-C", dsep_args.c, "conditioning set");
  dsep->add_option("--format", dsep_args.format, "text|records");

  SepArgs esep_args;
  CLI::App* esepc = app.add_subcommand(
      "esep", "e-separation verdict via both characterizations");
  esepc->add_option("-g,--graph", esep_args.graph, "graph file")->required();
  esepc->add_option("-A", esep_args.a, "left vertex set")->required();
  esepc->add_option("-B", esep_args.b, "right vertex set")->required();
  esepc->add_option("-C", esep_args.c, "conditioning set");
  esepc->add_option("-D", esep_args.d, "deletion set");
  esepc->add_option("--format", esep_args.format, "text|records");

  FindArgs find_args;
  CLI::App* find = app.add_subcommand(
      "find", "testable pairs and e-separation witnesses");
  find->add_option("-g,--graph", find_args.graph, "graph file")->required();
  find->add_option("-A", find_args.a, "first endpoint (with -B)");
  find->add_option("-B", find_args.b, "second endpoint (with -A)");
  find->add_option("--max-c", find_args.max_c, "cap on |C|");
  find->add_option("--max-d", find_args.max_d, "cap on |D|");
  find->add_option("--format", find_args.format, "text|records");

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand(
      "check", "evaluate every discovered constraint against a table");
  check->add_option("-g,--graph", check_args.graph, "graph file")->required();
  check->add_option("-t,--table", check_args.table, "distribution table")
      ->required();
  check->add_option("-A", check_args.a, "restrict to this endpoint (with -B)");
  check->add_option("-B", check_args.b, "second endpoint (with -A)");
  check->add_option("--max-c", check_args.max_c, "cap on |C|");
  check->add_option("--max-d", check_args.max_d, "cap on |D|");
  check->add_option("--multistarts", check_args.multistarts,
                    "weak-solver restarts");
  check->add_option("--seed", check_args.seed, "weak-solver seed");
  check->add_option("--tol", check_args.tol, "feasibility tolerance");
  check->add_option("--grid", check_args.grid,
                    "use the exhaustive grid oracle at this resolution");
  check->add_option("--format", check_args.format, "text|records");

  IvArgs iv_args;
  CLI::App* iv = app.add_subcommand(
      "iv", "instrumental inequality score and effect bounds");
  iv->add_option("-t,--table", iv_args.table, "distribution table")
      ->required();
  iv->add_option("-g,--graph", iv_args.graph, "graph file (for state counts)");
  iv->add_option("--x", iv_args.x, "treatment variable (default X)");
  iv->add_option("--y", iv_args.y, "outcome variable (default Y)");
  iv->add_option("--z", iv_args.z, "instrument variable (default Z)");
  iv->add_option("--tol", iv_args.tol, "violation tolerance");
  iv->add_option("--format", iv_args.format, "text|records");

  BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "interventional bounds for a conditional effect query");
  bounds->add_option("-g,--graph", bounds_args.graph, "graph file")
      ->required();
  bounds->add_option("-t,--table", bounds_args.table, "distribution table")
      ->required();
  bounds->add_option("--do", bounds_args.do_arg, "treatment, e.g. X=1")
      ->required();
  bounds->add_option("--outcome", bounds_args.outcome_arg,
                     "outcome, e.g. Y=1")
      ->required();
  bounds->add_option("--fix", bounds_args.fix,
                     "deletion-set assignment, e.g. W=0 (repeatable)");
  bounds->add_option("--given", bounds_args.given,
                     "conditioning assignment, e.g. V=0 (repeatable)");
  bounds->add_option("--variant", bounds_args.variant,
                     "auto|general|strengthened");
  bounds->add_flag("--acde", bounds_args.acde,
                   "also bound the controlled direct effect");
  bounds->add_option("--format", bounds_args.format, "text|records");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "random-model soundness sweep over a graph");
  sweep->add_option("-g,--graph", sweep_args.graph, "graph file")->required();
  sweep->add_option("--models", sweep_args.models, "number of models");
  sweep->add_option("--seed", sweep_args.seed, "base seed");
  sweep->add_option("--latent-states", sweep_args.latent_states,
                    "latent cardinality");
  sweep->add_option("--concentration", sweep_args.concentration,
                    "Dirichlet concentration");
  sweep->add_option("--max-c", sweep_args.max_c, "cap on |C|");
  sweep->add_option("--max-d", sweep_args.max_d, "cap on |D|");
  sweep->add_option("--tol", sweep_args.tol, "violation tolerance");
  sweep->add_option("--format", sweep_args.format, "text|records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (dsep->parsed()) return run_dsep(dsep_args);
    if (esepc->parsed()) return run_esep(esep_args);
    if (find->parsed()) return run_find(find_args);
    if (check->parsed()) return run_check(check_args);
    if (iv->parsed()) return run_iv(iv_args);
    if (bounds->parsed()) return run_bounds(bounds_args);
    if (sweep->parsed()) return run_sweep(sweep_args);
  } catch (const esep::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const esep::ModelFalsified& e) {
    std::cerr << "model falsified: " << e.what() << "\n";
    return 3;
  } catch (const esep::Error& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
