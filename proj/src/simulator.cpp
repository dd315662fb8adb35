#include "resid/simulator.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "resid/errors.hpp"
#include "resid/estimator.hpp"

namespace resid {

namespace {

constexpr double kProbSumTolerance = 1e-12;

void check_prob(double p, const char* what, bool open_interval = true) {
  const bool ok = std::isfinite(p) && (open_interval ? (p > 0.0 && p < 1.0)
                                                     : (p >= 0.0 && p <= 1.0));
  if (!ok) {
    throw ConfigError(std::string(what) + " must be a probability, got " +
                      std::to_string(p));
  }
}

}  // namespace

const GraphNode& ProgramGraph::node(const std::string& id) const {
  for (const GraphNode& n : nodes) {
    if (n.id == id) return n;
  }
  throw ConfigError("graph has no node '" + id + "'");
}

void ProgramGraph::validate() const {
  if (nodes.empty()) throw ConfigError("graph has no nodes");
  std::set<std::string> ids;
  for (const GraphNode& n : nodes) {
    if (n.id.empty()) throw ConfigError("graph node with empty id");
    if (!ids.insert(n.id).second) throw ConfigError("duplicate node id '" + n.id + "'");
  }
  auto known = [&](const std::string& id, const std::string& from) {
    if (ids.count(id) == 0) {
      throw ConfigError("node '" + from + "' references unknown node '" + id + "'");
    }
  };
  known(entry, "<entry>");
  for (const GraphNode& n : nodes) {
    switch (n.kind) {
      case GraphNode::Kind::linear:
        if (n.next) known(*n.next, n.id);
        break;
      case GraphNode::Kind::branch: {
        if (n.arms.empty()) throw ConfigError("branch node '" + n.id + "' has no arms");
        double sum = 0.0;
        for (const auto& [target, prob] : n.arms) {
          known(target, n.id);
          if (!(prob > 0.0 && prob <= 1.0)) {
            throw ConfigError("branch probability out of (0,1] on node '" + n.id + "'");
          }
          sum += prob;
        }
        if (std::abs(sum - 1.0) > kProbSumTolerance) {
          throw ConfigError("branch probabilities on node '" + n.id +
                            "' sum to " + std::to_string(sum) + ", expected 1");
        }
        break;
      }
      case GraphNode::Kind::loop:
        known(n.body, n.id);
        if (n.exit) known(*n.exit, n.id);
        if (n.iter_lo > n.iter_hi) {
          throw ConfigError("loop node '" + n.id + "' has an empty iteration range");
        }
        break;
    }
  }

  // reachability and cycle check over the successor edges; loops repeat via
  // the loop node, not via back edges, so the edge relation must be a DAG
  enum class Mark { unseen, open, done };
  std::map<std::string, Mark> marks;
  for (const GraphNode& n : nodes) marks[n.id] = Mark::unseen;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    Mark& m = marks[id];
    if (m == Mark::done) return;
    if (m == Mark::open) {
      throw ConfigError("graph has a cycle through node '" + id +
                        "'; loops must use loop nodes");
    }
    m = Mark::open;
    const GraphNode& n = node(id);
    switch (n.kind) {
      case GraphNode::Kind::linear:
        if (n.next) visit(*n.next);
        break;
      case GraphNode::Kind::branch:
        for (const auto& [target, prob] : n.arms) visit(target);
        break;
      case GraphNode::Kind::loop:
        visit(n.body);
        if (n.exit) visit(*n.exit);
        break;
    }
    m = Mark::done;
  };
  visit(entry);
  for (const auto& [id, m] : marks) {
    if (m != Mark::done) {
      throw ConfigError("node '" + id + "' is not reachable from the entry");
    }
  }
}

ProgramGraph builtin_graph(std::string_view name) {
  ProgramGraph g;
  if (name == "fig1-if") {
    g.entry = "1";
    g.nodes = {
        {"1", GraphNode::Kind::branch, {}, {{"2", 0.5}, {"3", 0.5}}, "", {}, 1, 1},
        {"2", GraphNode::Kind::linear, {}, {}, "", {}, 1, 1},
        {"3", GraphNode::Kind::linear, {}, {}, "", {}, 1, 1},
    };
  } else if (name == "fig2-loop") {
    g.entry = "1";
    g.nodes = {
        {"1", GraphNode::Kind::loop, {}, {}, "2", "3", 1, 100},
        {"2", GraphNode::Kind::linear, {}, {}, "", {}, 1, 1},
        {"3", GraphNode::Kind::linear, {}, {}, "", {}, 1, 1},
    };
  } else if (name == "fig3-flowchart") {
    g.entry = "1";
    g.nodes = {
        {"1", GraphNode::Kind::branch, {}, {{"2", 0.5}, {"4", 0.5}}, "", {}, 1, 1},
        {"2", GraphNode::Kind::loop, {}, {}, "3", "4", 1, 100},
        {"3", GraphNode::Kind::linear, {}, {}, "", {}, 1, 1},
        {"4", GraphNode::Kind::linear, {}, {}, "", {}, 1, 1},
    };
  } else {
    throw ConfigError("unknown builtin graph '" + std::string(name) +
                      "'; known: fig1-if, fig2-loop, fig3-flowchart");
  }
  g.validate();
  return g;
}

ProgramGraph parse_graph(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || line != "# resid-graph v1") {
    throw ConfigError(name + ": not a graph file (missing '# resid-graph v1')");
  }
  ProgramGraph g;
  int row = 1;
  auto fail = [&](const std::string& msg) -> void {
    throw ConfigError(name + ": line " + std::to_string(row) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++row;
    std::istringstream words(line);
    std::string word;
    if (!(words >> word) || word[0] == '#') continue;
    if (word == "entry") {
      if (!(words >> g.entry)) fail("expected 'entry <id>'");
    } else if (word == "linear") {
      GraphNode n;
      n.kind = GraphNode::Kind::linear;
      std::string next;
      if (!(words >> n.id >> next)) fail("expected 'linear <id> <next|->'");
      if (next != "-") n.next = next;
      g.nodes.push_back(std::move(n));
    } else if (word == "branch") {
      GraphNode n;
      n.kind = GraphNode::Kind::branch;
      if (!(words >> n.id)) fail("expected 'branch <id> <target>:<prob> ...'");
      std::string arm;
      while (words >> arm) {
        const std::size_t colon = arm.rfind(':');
        if (colon == std::string::npos) fail("branch arm must be <target>:<prob>");
        try {
          n.arms.emplace_back(arm.substr(0, colon), std::stod(arm.substr(colon + 1)));
        } catch (const std::exception&) {
          fail("bad probability in arm '" + arm + "'");
        }
      }
      g.nodes.push_back(std::move(n));
    } else if (word == "loop") {
      GraphNode n;
      n.kind = GraphNode::Kind::loop;
      std::string exit, range;
      if (!(words >> n.id >> n.body >> exit >> range)) {
        fail("expected 'loop <id> <body> <exit|-> <lo>..<hi>'");
      }
      if (exit != "-") n.exit = exit;
      const std::size_t dots = range.find("..");
      if (dots == std::string::npos) fail("iteration range must be <lo>..<hi>");
      try {
        n.iter_lo = std::stoull(range.substr(0, dots));
        n.iter_hi = std::stoull(range.substr(dots + 2));
      } catch (const std::exception&) {
        fail("bad iteration range '" + range + "'");
      }
      g.nodes.push_back(std::move(n));
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  if (g.entry.empty()) throw ConfigError(name + ": missing 'entry' line");
  g.validate();
  return g;
}

ProgramGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read graph file '" + path + "'");
  return parse_graph(in, path);
}

void ExperimentConfig::validate() const {
  check_prob(p_true, "p");
  check_prob(alpha, "alpha");
  check_prob(trigger_probability, "trigger probability", false);
  if (runs_per_session < 0) throw ConfigError("runs_per_session must be >= 0");
  if (replications <= 0) throw ConfigError("replications must be positive");
}

namespace {

// Walks a chain starting at `start` until a node with no successor. Returns
// false when the visitor stopped the walk (a bug triggered).
bool walk_chain(const ProgramGraph& graph, const std::optional<std::string>& start,
                Rng& rng, const std::function<bool(const std::string&)>& visit) {
  std::optional<std::string> cur = start;
  while (cur) {
    const GraphNode& n = graph.node(*cur);
    if (!visit(n.id)) return false;
    switch (n.kind) {
      case GraphNode::Kind::linear:
        cur = n.next;
        break;
      case GraphNode::Kind::branch: {
        const double u = rng.uniform01();
        double cumulative = 0.0;
        const std::string* chosen = &n.arms.back().first;
        for (const auto& [target, prob] : n.arms) {
          cumulative += prob;
          if (u < cumulative) {
            chosen = &target;
            break;
          }
        }
        cur = *chosen;
        break;
      }
      case GraphNode::Kind::loop: {
        const std::uint64_t iterations = rng.uniform_int(n.iter_lo, n.iter_hi);
        for (std::uint64_t it = 0; it < iterations; ++it) {
          if (!walk_chain(graph, n.body, rng, visit)) return false;
        }
        cur = n.exit;
        break;
      }
    }
  }
  return true;
}

}  // namespace

RunRecord simulate_run(const ProgramGraph& graph,
                       const std::map<std::string, std::uint32_t>& debug_counts,
                       double p, double alpha, Rng& rng, double trigger_probability,
                       const std::string& run_id) {
  // fresh bug marks for this run, one draw per chunk in node order
  std::set<std::string> buggy;
  for (const GraphNode& n : graph.nodes) {
    auto it = debug_counts.find(n.id);
    const std::uint32_t r = it == debug_counts.end() ? 0 : it->second;
    if (rng.bernoulli(p * power_int(alpha, r))) buggy.insert(n.id);
  }

  RunRecord rec;
  rec.run_id = run_id;
  std::string hit;
  walk_chain(graph, graph.entry, rng, [&](const std::string& id) {
    rec.visits.push_back(id);
    if (buggy.count(id) != 0 &&
        (trigger_probability >= 1.0 || rng.bernoulli(trigger_probability))) {
      hit = id;
      return false;
    }
    return true;
  });
  if (!hit.empty()) {
    rec.bug = BugReport{{hit}, true};
  }
  return rec;
}

std::pair<std::vector<RunRecord>, SessionState> run_session(
    const ProgramGraph& graph, const ExperimentConfig& config) {
  config.validate();
  graph.validate();
  Rng rng(config.seed, config.stream);
  ModelParams params;
  params.alpha = config.alpha;
  std::vector<RunRecord> records;
  records.reserve(config.runs_per_session);
  SessionState state;
  for (int t = 1; t <= config.runs_per_session; ++t) {
    RunRecord rec =
        simulate_run(graph, state.debug_counts, config.p_true, config.alpha, rng,
                     config.trigger_probability, "run-" + std::to_string(t));
    rec.seq = static_cast<std::uint64_t>(t);
    state = process_run(state, rec, params);
    records.push_back(std::move(rec));
  }
  return {std::move(records), std::move(state)};
}

std::vector<CellResult> experiment_grid(const ProgramGraph& graph,
                                        const std::vector<double>& p_values,
                                        const std::vector<double>& alpha_values,
                                        int runs_per_session, int replications,
                                        std::uint64_t seed,
                                        double trigger_probability) {
  graph.validate();
  std::vector<CellResult> results;
  std::uint64_t cell_index = 0;
  for (double p : p_values) {
    for (double alpha : alpha_values) {
      CellResult cell;
      cell.p_true = p;
      cell.alpha = alpha;
      std::vector<double> estimates;
      estimates.reserve(replications);
      for (int rep = 0; rep < replications; ++rep) {
        ExperimentConfig cfg;
        cfg.p_true = p;
        cfg.alpha = alpha;
        cfg.runs_per_session = runs_per_session;
        cfg.replications = 1;
        cfg.seed = seed;
        cfg.stream = cell_index * static_cast<std::uint64_t>(replications) +
                     static_cast<std::uint64_t>(rep);
        cfg.trigger_probability = trigger_probability;
        auto [records, state] = run_session(graph, cfg);
        ModelParams params;
        params.alpha = alpha;
        const Estimate est = estimate_mle(extract_statistics(state), params);
        if (est.p_hat) {
          estimates.push_back(*est.p_hat);
        } else {
          cell.skipped += 1;
        }
      }
      cell.estimates = static_cast<int>(estimates.size());
      if (!estimates.empty()) {
        double sum = 0.0;
        for (double e : estimates) sum += e;
        cell.mean = sum / static_cast<double>(estimates.size());
        if (estimates.size() > 1) {
          double ss = 0.0;
          for (double e : estimates) ss += (e - cell.mean) * (e - cell.mean);
          cell.variance = ss / static_cast<double>(estimates.size() - 1);
        }
      }
      results.push_back(cell);
      ++cell_index;
    }
  }
  return results;
}

IndependenceResult independence_mc(double p_bug, double p_trigger,
                                   std::uint64_t trials, std::uint64_t seed) {
  check_prob(p_bug, "p_bug", false);
  check_prob(p_trigger, "p_trigger", false);
  if (trials == 0) throw ConfigError("trials must be positive");

  // separate sources for the programmer (bugs present) and the user (inputs
  // that trigger them) realize the product probability space
  Rng programmer(seed, 1);
  Rng user(seed, 2);

  std::uint64_t c1_count = 0;
  std::uint64_t c2_count = 0;
  std::uint64_t joint_count = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const bool a1 = programmer.bernoulli(p_bug);
    const bool a2 = programmer.bernoulli(p_bug);
    const bool b1 = user.bernoulli(p_trigger);
    const bool b2 = user.bernoulli(p_trigger);
    const bool c1 = a1 && b1;
    const bool c2 = a2 && b2;
    c1_count += c1;
    c2_count += c2;
    joint_count += c1 && c2;
  }
  const double n = static_cast<double>(trials);
  IndependenceResult r;
  r.joint = static_cast<double>(joint_count) / n;
  r.product = (static_cast<double>(c1_count) / n) * (static_cast<double>(c2_count) / n);
  r.standard_error = std::sqrt(r.joint * (1.0 - r.joint) / n);
  return r;
}

}  // namespace resid
