#pragma once

// Shared graphs, frozen tables, and generators for the test suites.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "esep/esep.hpp"

namespace fixtures {

// Classic instrument: Z randomizes X, X drives Y, U confounds X and Y.
inline constexpr const char* kIvGraph = R"(
latent U
Z -> X
X -> Y
U -> X
U -> Y
)";

// Instrument with a direct arrow to the outcome.
inline constexpr const char* kDirectIvGraph = R"(
latent U
Z -> X
X -> Y
Z -> Y
U -> X
U -> Y
)";

// Unobserved confounding: X causes both Z and Y, with separate confounders.
inline constexpr const char* kUcGraph = R"(
latent U1
latent U2
X -> Z
X -> Y
U1 -> X
U1 -> Z
U2 -> X
U2 -> Y
)";

// Four observed variables tangled through three bidirected pairs.
inline constexpr const char* kFourVarGraph = R"(
Z -> Y
W -> X
W <-> Y
X <-> Z
Z <-> W
)";

// Observed margin that maximally violates the instrumental inequality:
// X is constant and Y copies Z, so max_x sum_y max_z p(x,y|z) = 2.
inline constexpr const char* kIvViolatingTable =
    "Z X Y p\n"
    "0 0 0 0.5\n"
    "1 0 1 0.5\n";

// All mass on one X slice with (Z, Y) strongly correlated: no product
// distribution can dominate the diagonal, so the weak slice is infeasible
// with margin (sqrt(.49) + sqrt(.49))^2 - 1 = 0.96.
inline constexpr const char* kUcCorrelatedTable =
    "X Y Z p\n"
    "0 0 0 0.49\n"
    "0 1 1 0.49\n"
    "0 0 1 0.01\n"
    "0 1 0 0.01\n";

inline esep::Dag iv_graph() { return esep::parse_graph(kIvGraph); }
inline esep::Dag direct_iv_graph() { return esep::parse_graph(kDirectIvGraph); }
inline esep::Dag uc_graph() { return esep::parse_graph(kUcGraph); }
inline esep::Dag four_var_graph() { return esep::parse_graph(kFourVarGraph); }

inline esep::JointTable iv_violating_table() {
  return esep::load_table_text(kIvViolatingTable).table;
}
inline esep::JointTable uc_correlated_table() {
  return esep::load_table_text(kUcCorrelatedTable).table;
}

// Random DAG with latent roots: latents come first in topological order and
// only ever point at observed vertices, so every draw is a valid graph.
inline esep::Dag random_dag(std::mt19937_64& rng, int max_vertices,
                            int max_latents, double edge_prob = 0.4) {
  int n = 3 + static_cast<int>(rng() % (max_vertices - 2));
  int nl = static_cast<int>(rng() % (max_latents + 1));
  if (nl > n - 2) nl = n - 2;  // keep at least two observed vertices

  std::vector<esep::VertexDecl> decls;
  for (int i = 0; i < nl; ++i)
    decls.push_back({"L" + std::to_string(i), esep::Visibility::Latent, 0});
  for (int i = nl; i < n; ++i)
    decls.push_back({"V" + std::to_string(i), esep::Visibility::Observed, 2});

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i + 1, nl); j < n; ++j)  // children are observed
      if (coin(rng) < edge_prob)
        edges.emplace_back(decls[i].name, decls[j].name);
  return esep::Dag(decls, edges);
}

// Uniformly random observed-vertex subset (each vertex kept with prob 1/3).
inline esep::VertexSet random_observed_subset(std::mt19937_64& rng,
                                              const esep::Dag& g,
                                              const esep::VertexSet& exclude) {
  std::vector<int> ids;
  for (int v : g.observed_set())
    if (!exclude.contains(v) && rng() % 3 == 0) ids.push_back(v);
  return esep::VertexSet(ids);
}

inline esep::DiscreteModel random_model_on(const char* graph_text,
                                           std::uint64_t seed,
                                           int latent_states = 4) {
  esep::ModelGenSpec spec;
  spec.graph = esep::parse_graph(graph_text);
  spec.seed = seed;
  spec.latent_states = latent_states;
  return esep::random_model(spec);
}

// --- subprocess + temp-file helpers (CLI and acceptance tests) -------------

struct CliResult {
  int exit_code = -1;
  std::string out;  // stdout and stderr interleaved
};

#ifdef ESEP_CLI_PATH
inline CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(ESEP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  CliResult res;
  if (!pipe) return res;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe))
    res.out.append(buf, got);
  int status = pclose(pipe);
  res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status)
                                                     : -1;
  return res;
}
#endif

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 1000; ++i) {
      auto candidate =
          base / ("esep_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string write(const std::string& name, const std::string& content) {
    auto p = path_ / name;
    std::ofstream out(p);
    out << content;
    out.close();
    return p.string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  static inline int counter_ = 0;
};

}  // namespace fixtures
