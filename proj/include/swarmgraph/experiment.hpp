#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swarmgraph/agents.hpp"
#include "swarmgraph/edge_distribution.hpp"
#include "swarmgraph/executors.hpp"
#include "swarmgraph/graph.hpp"
#include "swarmgraph/reinforce.hpp"
#include "swarmgraph/serialization.hpp"
#include "swarmgraph/tasks.hpp"

namespace swarmgraph {

// ---------------------------------------------------------------------------
// Utility functions
// ---------------------------------------------------------------------------

/// Fraction of tasks whose final output matches the gold answer after
/// canonicalization. A single-task call is the per-sample utility estimate
/// used during edge optimization.
inline double accuracy_utility(const CompositeGraph& g,
                               const std::vector<TaskInstance>& tasks,
                               Executor& executor, std::mt19937_64& rng) {
  if (tasks.empty()) throw DomainError("accuracy_utility needs tasks");
  (void)rng;  // reserved for stochastic executors; the mock is pure
  double correct = 0.0;
  for (const auto& t : tasks) {
    const ExecutionTrace trace =
        execute(g, render_question(t), executor, t.problem_id);
    if (canonical_answer(trace.final_output) == canonical_answer(t.gold)) {
      correct += 1.0;
    }
  }
  return correct / static_cast<double>(tasks.size());
}

inline double accuracy_utility(const AgentGraph& g,
                               const std::vector<TaskInstance>& tasks,
                               Executor& executor, std::mt19937_64& rng) {
  CompositeGraph wrapped;
  wrapped.agents = {g};
  wrapped.required_edges = g.required_edges;
  wrapped.output_node = g.output_node;
  return accuracy_utility(wrapped, tasks, executor, rng);
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct SwarmSpec {
  int truthful = 2;
  int adversarial = 2;
  DecisionKind decision = DecisionKind::MajorityVote;
  /// When set, every agent output is wired to the decision node up front and
  /// removed from the learnable candidate set.
  bool mandate_decision_edges = false;
  /// Optional roles assigned cyclically to the truthful agents.
  std::vector<std::string> roles;
};

struct TaskSetup {
  int num_options = 4;
  int opt_pool = 256;
  int eval_size = 153;
  double p_truthful = 0.85;
  double p_adversarial = 0.0;
};

struct ExperimentConfig {
  SwarmSpec swarm;
  EdgeOptConfig edge_opt;
  TaskSetup tasks;
  std::uint64_t seed = 1;
};

/// Builds the truthful/adversarial swarm with a decision agent as composite
/// output. Agent ids are zero-padded so canonical order matches construction
/// order.
inline CompositeGraph build_adversarial_swarm(const SwarmSpec& spec) {
  if (spec.truthful < 1) {
    throw DomainError("adversarial swarm needs at least one truthful agent");
  }
  if (spec.adversarial < 0) {
    throw DomainError("adversarial agent count must be >= 0");
  }
  const auto pad = [](int i) {
    std::ostringstream os;
    os << (i < 10 ? "0" : "") << i;
    return os.str();
  };
  std::vector<AgentGraph> agents;
  for (int i = 0; i < spec.truthful; ++i) {
    std::optional<std::string> role;
    if (!spec.roles.empty()) {
      role = spec.roles[static_cast<std::size_t>(i) % spec.roles.size()];
    }
    agents.push_back(build_io_agent("t" + pad(i), role));
  }
  for (int i = 0; i < spec.adversarial; ++i) {
    agents.push_back(build_adversarial_agent("a" + pad(i)));
  }
  agents.push_back(build_decision_agent("decision", spec.decision));
  const std::size_t output_index = agents.size() - 1;

  std::set<Edge> mandated;
  if (spec.mandate_decision_edges) {
    const NodeId decide = agents.back().output_node;
    for (std::size_t i = 0; i + 1 < agents.size(); ++i) {
      mandated.insert({agents[i].output_node, decide});
    }
  }
  return compose(agents, output_index, mandated);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct EvalScores {
  double accuracy = 0.0;
  std::vector<int> per_problem;
};

/// Outcome of one adversarial-recovery run. Everything except the wall-clock
/// time is reproducible from (config, seed); the timing is reported in a
/// separate sidecar file so report files stay byte-identical across reruns.
struct EvalReport {
  std::uint64_t seed = 0;
  int truthful = 0;
  int adversarial = 0;
  int potential_edge_count = 0;
  EvalScores baseline;
  EvalScores full_graph;
  EvalScores random_graph;
  EvalScores optimized;
  std::vector<std::string> realized_edges;
  std::vector<double> mean_utility_curve;
  long long llm_calls = 0;
  int eval_size = 0;
  double optimize_seconds = 0.0;
};

namespace detail {

inline EvalScores score_per_problem(
    const std::vector<TaskInstance>& tasks,
    const std::function<std::string(const TaskInstance&)>& answer) {
  EvalScores s;
  s.per_problem.reserve(tasks.size());
  for (const auto& t : tasks) {
    const bool ok = canonical_answer(answer(t)) == canonical_answer(t.gold);
    s.per_problem.push_back(ok ? 1 : 0);
    s.accuracy += ok ? 1.0 : 0.0;
  }
  if (!tasks.empty()) s.accuracy /= static_cast<double>(tasks.size());
  return s;
}

}  // namespace detail

/// Desk-scale adversarial recovery experiment: optimize the swarm's edges
/// with the mock backend, then score the single-truthful baseline, the full
/// graph, a fresh random graph per problem, and the optimized realization on
/// a held-out evaluation set. All four evaluations share the same per-problem
/// mock draws, so the comparisons are paired.
inline std::pair<EvalReport, std::pair<EdgeDistribution, OptRunRecord>>
run_adversarial_experiment_detailed(const ExperimentConfig& cfg) {
  const CompositeGraph swarm = build_adversarial_swarm(cfg.swarm);

  TaskGenParams gen;
  gen.num_options = cfg.tasks.num_options;
  gen.count = cfg.tasks.opt_pool + cfg.tasks.eval_size;
  const std::vector<TaskInstance> all_tasks = generate_tasks(gen, cfg.seed);
  const std::vector<TaskInstance> opt_tasks(
      all_tasks.begin(), all_tasks.begin() + cfg.tasks.opt_pool);
  const std::vector<TaskInstance> eval_tasks(
      all_tasks.begin() + cfg.tasks.opt_pool, all_tasks.end());

  MockPolicy policy;
  policy.truthful_accuracy = cfg.tasks.p_truthful;
  policy.adversarial_accuracy = cfg.tasks.p_adversarial;
  policy.seed = cfg.seed;
  MockExecutor executor(policy, all_tasks);

  const UtilityEstimator estimator = [&](const CompositeGraph& realized,
                                         std::mt19937_64& rng) {
    const TaskInstance& task = opt_tasks[next_index(rng, opt_tasks.size())];
    const std::vector<TaskInstance> one{task};
    return accuracy_utility(realized, one, executor, rng);
  };

  EdgeOptConfig opt_cfg = cfg.edge_opt;
  opt_cfg.seed = stable_hash(cfg.seed, "edge-opt");

  const auto start = std::chrono::steady_clock::now();
  auto [dist, record] = optimize_edges(swarm, estimator, opt_cfg);
  const auto elapsed = std::chrono::steady_clock::now() - start;

  EvalReport report;
  report.seed = cfg.seed;
  report.truthful = cfg.swarm.truthful;
  report.adversarial = cfg.swarm.adversarial;
  report.potential_edge_count = static_cast<int>(swarm.potential_edges.size());
  report.eval_size = cfg.tasks.eval_size;
  report.optimize_seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(elapsed)
          .count();
  for (const auto& it : record.iterations) {
    report.mean_utility_curve.push_back(it.mean_utility);
  }

  const AgentGraph& first_truthful = swarm.agents.front();
  report.baseline = detail::score_per_problem(
      eval_tasks, [&](const TaskInstance& t) {
        return execute(first_truthful, render_question(t), executor,
                       t.problem_id)
            .final_output;
      });

  const CompositeGraph full = prune(swarm, full_realization(swarm));
  report.full_graph = detail::score_per_problem(
      eval_tasks, [&](const TaskInstance& t) {
        return execute(full, render_question(t), executor, t.problem_id)
            .final_output;
      });

  const EdgeDistribution half = new_distribution(swarm, 0.5);
  report.random_graph = detail::score_per_problem(
      eval_tasks, [&](const TaskInstance& t) {
        std::mt19937_64 rng(stable_hash(cfg.seed, "random-eval", t.problem_id));
        const GraphSample s = sample(half, swarm, rng);
        const CompositeGraph g = prune(swarm, edges_from_mask(half, s.included));
        return execute(g, render_question(t), executor, t.problem_id)
            .final_output;
      });

  const std::set<Edge> realized =
      realize(dist, swarm, cfg.edge_opt.realize_threshold);
  const CompositeGraph optimized = prune(swarm, realized);
  report.optimized = detail::score_per_problem(
      eval_tasks, [&](const TaskInstance& t) {
        return execute(optimized, render_question(t), executor, t.problem_id)
            .final_output;
      });
  for (const auto& e : realized) report.realized_edges.push_back(edge_str(e));

  report.llm_calls = executor.llm_calls();
  return {std::move(report), {std::move(dist), std::move(record)}};
}

inline EvalReport run_adversarial_experiment(const ExperimentConfig& cfg) {
  return run_adversarial_experiment_detailed(cfg).first;
}

// ---------------------------------------------------------------------------
// Config and report serialization
// ---------------------------------------------------------------------------

inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  const json swarm = j.value("swarm", json::object());
  cfg.swarm.truthful = swarm.value("truthful", 2);
  cfg.swarm.adversarial = swarm.value("adversarial", 2);
  cfg.swarm.decision =
      decision_kind_from_string(swarm.value("decision", "majority_vote"));
  cfg.swarm.mandate_decision_edges =
      swarm.value("mandate_decision_edges", false);
  cfg.swarm.roles = swarm.value("roles", std::vector<std::string>{});

  const json eo = j.value("edge_opt", json::object());
  cfg.edge_opt.iterations = eo.value("iterations", 200);
  cfg.edge_opt.samples_per_iter = eo.value("samples_per_iter", 4);
  cfg.edge_opt.learning_rate = eo.value("learning_rate", 0.1);
  cfg.edge_opt.baseline = eo.value("baseline", 0.0);
  cfg.edge_opt.init_prob = eo.value("init_prob", 0.5);
  cfg.edge_opt.realize_threshold = eo.value("realize_threshold", 0.5);
  cfg.edge_opt.use_adam = eo.value("use_adam", true);

  const json tasks = j.value("tasks", json::object());
  cfg.tasks.num_options = tasks.value("num_options", 4);
  cfg.tasks.opt_pool = tasks.value("opt_pool", 256);
  cfg.tasks.eval_size = tasks.value("eval_size", 153);
  cfg.tasks.p_truthful = tasks.value("p_truthful", 0.85);
  cfg.tasks.p_adversarial = tasks.value("p_adversarial", 0.0);

  cfg.seed = j.value("seed", std::uint64_t{1});
  return cfg;
}

inline json report_to_json(const EvalReport& r) {
  const auto scores = [](const EvalScores& s) {
    return json{{"accuracy", s.accuracy}, {"per_problem", s.per_problem}};
  };
  return {{"seed", r.seed},
          {"swarm", {{"truthful", r.truthful}, {"adversarial", r.adversarial}}},
          {"potential_edge_count", r.potential_edge_count},
          {"eval_size", r.eval_size},
          {"scores",
           {{"baseline", scores(r.baseline)},
            {"full_graph", scores(r.full_graph)},
            {"random_graph", scores(r.random_graph)},
            {"optimized", scores(r.optimized)}}},
          {"realized_edges", r.realized_edges},
          {"mean_utility_curve", r.mean_utility_curve},
          {"llm_calls", r.llm_calls}};
}

inline std::string report_to_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "configuration,accuracy\n";
  os << "baseline," << format_cell(r.baseline.accuracy) << "\n";
  os << "full_graph," << format_cell(r.full_graph.accuracy) << "\n";
  os << "random_graph," << format_cell(r.random_graph.accuracy) << "\n";
  os << "optimized," << format_cell(r.optimized.accuracy) << "\n";
  return os.str();
}

/// Writes the experiment artifacts: report.json and params.json are
/// byte-stable across reruns of the same config; wall-clock timing goes to
/// timing.json only.
inline void write_report_files(const EvalReport& report,
                               const EdgeDistribution& dist,
                               const CompositeGraph& swarm,
                               const OptRunRecord& record,
                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_json_file(out_dir / "report.json", report_to_json(report));
  write_text_file(out_dir / "report.csv", report_to_csv(report));
  write_json_file(out_dir / "params.json",
                  parameters_to_json(dist, report.seed));
  {
    std::ostringstream os;
    write_heatmap(os, dist, swarm);
    write_text_file(out_dir / "heatmap.csv", os.str());
  }
  {
    std::ostringstream os;
    write_run_record(os, record);
    write_text_file(out_dir / "run_record.jsonl", os.str());
  }
  write_json_file(out_dir / "timing.json",
                  {{"optimize_seconds", report.optimize_seconds}});
}

}  // namespace swarmgraph
