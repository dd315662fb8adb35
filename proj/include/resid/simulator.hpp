#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resid/records.hpp"
#include "resid/rng.hpp"

namespace resid {

// Control-flow graph the simulator walks. Every node is a chunk; its kind
// says where control goes after the chunk runs:
//   linear  -> next (absent = program end)
//   branch  -> one of the arms, by probability
//   loop    -> the body chain, a uniformly drawn number of times, then exit
// Loop repetition comes from the loop node itself; the successor structure
// must be acyclic, so every path terminates.
struct GraphNode {
  enum class Kind { linear, branch, loop };

  std::string id;
  Kind kind = Kind::linear;
  std::optional<std::string> next;                       // linear
  std::vector<std::pair<std::string, double>> arms;      // branch
  std::string body;                                      // loop
  std::optional<std::string> exit;                       // loop
  std::uint64_t iter_lo = 1;                             // loop
  std::uint64_t iter_hi = 1;
};

struct ProgramGraph {
  std::string entry;
  std::vector<GraphNode> nodes;

  const GraphNode& node(const std::string& id) const;
  // Checks ids, branch probabilities (sum 1 within 1e-12), loop bounds,
  // reachability from entry and acyclicity. Throws ConfigError.
  void validate() const;
};

// Builtin graphs: "fig1-if" (chunk 1 branches evenly to chunk 2 or 3),
// "fig2-loop" (chunk 1 loops over chunk 2, then chunk 3) and
// "fig3-flowchart" (entry branches evenly to a loop or straight to the exit
// chunk; loop body iterates uniform{1..100} times).
ProgramGraph builtin_graph(std::string_view name);

// Graph file: "# resid-graph v1" header, then one node per line:
//   entry <id>
//   linear <id> <next|->
//   branch <id> <target>:<prob> [...]
//   loop <id> <body> <exit|-> <lo>..<hi>
ProgramGraph parse_graph(std::istream& in, const std::string& name = "<stream>");
ProgramGraph load_graph(const std::string& path);

struct ExperimentConfig {
  double p_true = 0.5;
  double alpha = 0.9;
  int runs_per_session = 50;
  int replications = 100;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;        // RNG stream index for this session
  double trigger_probability = 1.0;  // chance a buggy chunk fails per visit

  void validate() const;
};

// One simulated run: each chunk is marked buggy with probability
// p * alpha^r (r = times that chunk has been debugged), then control walks
// the graph, logging every visit. The walk stops at the first visit of a
// buggy chunk that triggers; the record reports that chunk as found and
// removed. trigger_probability 1 means a buggy chunk fails on first visit.
RunRecord simulate_run(const ProgramGraph& graph,
                       const std::map<std::string, std::uint32_t>& debug_counts,
                       double p, double alpha, Rng& rng,
                       double trigger_probability = 1.0,
                       const std::string& run_id = "run");

// A whole debugging session: runs_per_session runs, each folded into the
// session state so removed bugs lower the next run's injection probability.
std::pair<std::vector<RunRecord>, SessionState> run_session(
    const ProgramGraph& graph, const ExperimentConfig& config);

struct CellResult {
  double p_true = 0.0;
  double alpha = 0.0;
  double mean = 0.0;      // of the per-session MLEs
  double variance = 0.0;  // sample variance (n-1)
  int estimates = 0;      // sessions with a defined MLE
  int skipped = 0;        // sessions with undefined MLE (m = 0)
};

// Replicated sessions over the (p, alpha) grid; each replication gets its
// own RNG stream, so results do not depend on evaluation order.
std::vector<CellResult> experiment_grid(const ProgramGraph& graph,
                                        const std::vector<double>& p_values,
                                        const std::vector<double>& alpha_values,
                                        int runs_per_session, int replications,
                                        std::uint64_t seed,
                                        double trigger_probability = 1.0);

struct IndependenceResult {
  double joint = 0.0;           // empirical P(C1 and C2)
  double product = 0.0;         // empirical P(C1) * P(C2)
  double standard_error = 0.0;  // binomial SE of the joint estimate
};

// Monte Carlo check that "chunk found buggy" events are independent when
// programmer events (bug present) and user events (input triggers it) are
// drawn from two independent sources: C_i = A_i and B_i.
IndependenceResult independence_mc(double p_bug, double p_trigger,
                                   std::uint64_t trials, std::uint64_t seed);

}  // namespace resid
