#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "swarmgraph/executors.hpp"
#include "swarmgraph/graph.hpp"
#include "swarmgraph/tasks.hpp"

namespace swarmgraph {

/// Entries scoring strictly above this are treated as positive examples when
/// harvesting demonstrations (scores are pass/fail at desk scale).
inline constexpr double kPositiveScoreThreshold = 0.5;

/// One observed node execution: the node's input pair (context, run input),
/// its output, and an optional task score attached after the run.
struct HistoryEntry {
  NodeContext context;
  std::string input;
  std::string output;
  std::optional<double> score;
  std::string problem_id;

  bool operator==(const HistoryEntry&) const = default;
};

struct NodeHistory {
  NodeId node_id;
  std::deque<HistoryEntry> entries;
};

/// Per-node execution history with FIFO eviction.
class HistoryStore {
 public:
  explicit HistoryStore(std::size_t cap_per_node = 1000) : cap_(cap_per_node) {}

  /// Appends one entry per trace record; `scores_by_node` may assign a score
  /// (commonly the graph-level outcome) to any subset of nodes.
  void record(const ExecutionTrace& trace,
              const std::map<NodeId, double>& scores_by_node = {}) {
    for (const auto& r : trace.records) {
      HistoryEntry e;
      e.context = r.context;
      e.input = r.input;
      e.output = r.output;
      e.problem_id = trace.problem_id;
      const auto it = scores_by_node.find(r.node);
      if (it != scores_by_node.end()) e.score = it->second;
      auto& h = histories_[r.node];
      h.node_id = r.node;
      h.entries.push_back(std::move(e));
      while (h.entries.size() > cap_) h.entries.pop_front();
    }
  }

  const NodeHistory& history(const NodeId& id) const {
    static const NodeHistory empty{};
    const auto it = histories_.find(id);
    return it == histories_.end() ? empty : it->second;
  }

  const std::map<NodeId, NodeHistory>& all() const { return histories_; }

  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
  std::map<NodeId, NodeHistory> histories_;
};

/// Maps (history, prompt, description) to an improved prompt. Improvers must
/// be the identity on empty history.
using Improver = std::function<Prompt(const NodeHistory&, const Prompt&,
                                      const std::string& description)>;

/// Re-invokes a node's routine on a stored input with a candidate prompt and
/// scores the output. The stored context is replayed as-is.
using ReplayScorer = std::function<double(
    const NodeId& node, const Prompt& candidate, const HistoryEntry& entry)>;

struct NodeOptConfig {
  int update_every = 4;
  int max_demos = 4;
  int replay_window = 10;
  int ucb_iterations = 100;
  std::size_t history_cap = 1000;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<DemoExample> dedupe_demos(
    const std::vector<DemoExample>& demos) {
  std::vector<DemoExample> out;
  for (const auto& d : demos) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& o) {
      return o.input == d.input && o.output == d.output;
    });
    if (!seen) out.push_back(d);
  }
  return out;
}

/// Positive demonstrations drawn from the last `window_problems` distinct
/// problems in the history.
inline std::vector<DemoExample> recent_positive_demos(const NodeHistory& h,
                                                      int window_problems) {
  std::vector<std::string> problems;
  for (const auto& e : h.entries) {
    if (std::find(problems.begin(), problems.end(), e.problem_id) ==
        problems.end()) {
      problems.push_back(e.problem_id);
    }
  }
  const std::size_t keep = std::min<std::size_t>(
      problems.size(), static_cast<std::size_t>(std::max(window_problems, 0)));
  const std::vector<std::string> window(problems.end() - keep, problems.end());

  std::vector<DemoExample> out;
  for (const auto& e : h.entries) {
    if (!e.score || *e.score <= kPositiveScoreThreshold) continue;
    if (std::find(window.begin(), window.end(), e.problem_id) == window.end()) {
      continue;
    }
    out.push_back({e.input, e.output, true});
  }
  return dedupe_demos(out);
}

inline std::vector<const HistoryEntry*> replay_inputs(const NodeHistory& h,
                                                      int window) {
  std::vector<const HistoryEntry*> out;
  const std::size_t keep = std::min<std::size_t>(
      h.entries.size(), static_cast<std::size_t>(std::max(window, 0)));
  for (std::size_t i = h.entries.size() - keep; i < h.entries.size(); ++i) {
    out.push_back(&h.entries[i]);
  }
  return out;
}

inline double replay_sum(const ReplayScorer& scorer, const NodeId& node,
                         const Prompt& candidate,
                         const std::vector<const HistoryEntry*>& entries) {
  double total = 0.0;
  for (const HistoryEntry* e : entries) {
    try {
      total += scorer(node, candidate, *e);
    } catch (const ReplayFailure&) {
      throw;
    } catch (const std::exception& ex) {
      throw ReplayFailure("replay of node " + node.str() +
                          " failed: " + ex.what());
    }
  }
  return total;
}

}  // namespace detail

/// Greedy demonstration improver: compares the current demonstration set
/// against a resampled pool augmented with recent positive examples, replayed
/// over the most recent inputs. Ties keep the current prompt.
inline Prompt greedy_demo_improver(const NodeHistory& history,
                                   const Prompt& prompt,
                                   const std::string& /*description*/,
                                   const ReplayScorer& scorer,
                                   const NodeOptConfig& cfg,
                                   std::mt19937_64& rng) {
  if (history.entries.empty()) return prompt;

  std::vector<DemoExample> pool = prompt.demos;
  for (const auto& d :
       detail::recent_positive_demos(history, cfg.update_every)) {
    pool.push_back(d);
  }
  pool = detail::dedupe_demos(pool);
  if (pool.empty()) return prompt;

  // Uniform sample without replacement of up to max_demos pool entries.
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    std::swap(idx[i], idx[next_index(rng, i + 1)]);
  }
  const std::size_t take = std::min<std::size_t>(
      idx.size(), static_cast<std::size_t>(std::max(cfg.max_demos, 0)));
  Prompt candidate = prompt;
  candidate.demos.clear();
  for (std::size_t i = 0; i < take; ++i) candidate.demos.push_back(pool[idx[i]]);

  const auto window = detail::replay_inputs(history, cfg.replay_window);
  const double current_score =
      detail::replay_sum(scorer, history.node_id, prompt, window);
  const double candidate_score =
      detail::replay_sum(scorer, history.node_id, candidate, window);
  return candidate_score > current_score ? candidate : prompt;
}

/// UCB1 bandit over arms: play counts, reward sums, and the standard index
/// mean + sqrt(2 ln t / n). Unplayed arms take priority in index order.
class Ucb1 {
 public:
  explicit Ucb1(std::size_t arms) : counts_(arms, 0), sums_(arms, 0.0) {}

  std::size_t arms() const { return counts_.size(); }

  double mean(std::size_t arm) const {
    return counts_[arm] == 0 ? 0.0 : sums_[arm] / counts_[arm];
  }

  double index(std::size_t arm, std::size_t t) const {
    if (counts_[arm] == 0) return std::numeric_limits<double>::infinity();
    return mean(arm) + std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                                 static_cast<double>(counts_[arm]));
  }

  std::size_t select(std::size_t t) const {
    for (std::size_t a = 0; a < arms(); ++a) {
      if (counts_[a] == 0) return a;
    }
    std::size_t best = 0;
    double best_index = index(0, t);
    for (std::size_t a = 1; a < arms(); ++a) {
      const double idx = index(a, t);
      if (idx > best_index) {
        best = a;
        best_index = idx;
      }
    }
    return best;
  }

  void update(std::size_t arm, double reward) {
    ++counts_[arm];
    sums_[arm] += reward;
  }

  std::size_t best_mean_arm() const {
    std::size_t best = 0;
    for (std::size_t a = 1; a < arms(); ++a) {
      if (mean(a) > mean(best)) best = a;
    }
    return best;
  }

  std::size_t count(std::size_t arm) const { return counts_[arm]; }

 private:
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
};

/// Bandit-based improver: arm 0 keeps the prompt unchanged, every other arm
/// appends one candidate demonstration from the history. Each round replays
/// one recent input with the selected arm's prompt; after the budget the
/// highest-mean arm's prompt is returned.
inline Prompt ucb1_demo_improver(const NodeHistory& history,
                                 const Prompt& prompt,
                                 const std::string& /*description*/,
                                 const ReplayScorer& scorer,
                                 const NodeOptConfig& cfg,
                                 std::mt19937_64& rng) {
  if (history.entries.empty()) return prompt;

  std::vector<DemoExample> candidates;
  for (const auto& e : history.entries) {
    candidates.push_back({e.input, e.output, true});
  }
  candidates = detail::dedupe_demos(candidates);

  std::vector<Prompt> arms;
  arms.push_back(prompt);
  for (const auto& d : candidates) {
    Prompt p = prompt;
    p.append_demo(d, static_cast<std::size_t>(std::max(cfg.max_demos, 1)));
    arms.push_back(std::move(p));
  }

  const auto window = detail::replay_inputs(history, cfg.replay_window);
  if (window.empty()) return prompt;

  Ucb1 bandit(arms.size());
  for (std::size_t t = 1; t <= static_cast<std::size_t>(cfg.ucb_iterations);
       ++t) {
    const std::size_t arm = bandit.select(t);
    const HistoryEntry& entry = *window[next_index(rng, window.size())];
    double reward = 0.0;
    try {
      reward = scorer(history.node_id, arms[arm], entry);
    } catch (const ReplayFailure&) {
      throw;
    } catch (const std::exception& ex) {
      throw ReplayFailure("replay of node " + history.node_id.str() +
                          " failed: " + ex.what());
    }
    bandit.update(arm, reward);
  }
  return arms[bandit.best_mean_arm()];
}

/// Binds a concrete improver: per-call generators derive from (seed, node,
/// history length) so one node's update never consumes another node's stream.
inline Improver make_greedy_improver(ReplayScorer scorer, NodeOptConfig cfg) {
  return [scorer = std::move(scorer), cfg](const NodeHistory& h,
                                           const Prompt& p,
                                           const std::string& d) {
    std::mt19937_64 rng(
        stable_hash(cfg.seed, "greedy-improver", h.node_id.str(),
                    h.entries.size()));
    return greedy_demo_improver(h, p, d, scorer, cfg, rng);
  };
}

inline Improver make_ucb1_improver(ReplayScorer scorer, NodeOptConfig cfg) {
  return [scorer = std::move(scorer), cfg](const NodeHistory& h,
                                           const Prompt& p,
                                           const std::string& d) {
    std::mt19937_64 rng(stable_hash(cfg.seed, "ucb1-improver",
                                    h.node_id.str(), h.entries.size()));
    return ucb1_demo_improver(h, p, d, scorer, cfg, rng);
  };
}

/// Standard replay scorer: re-invokes the node routine (with the candidate
/// prompt applied) on the stored context and input, then scores the output.
inline ReplayScorer make_executor_replay_scorer(
    const CompositeGraph& graph, Executor& executor,
    std::function<double(const std::string& output,
                         const std::string& problem_id)>
        score_output) {
  return [&graph, &executor, score_output = std::move(score_output)](
             const NodeId& id, const Prompt& candidate,
             const HistoryEntry& entry) {
    const Node* base = graph.find_node(id);
    if (base == nullptr) {
      throw ReplayFailure("replay scorer: unknown node " + id.str());
    }
    Node node = *base;
    node.prompt = candidate;
    const std::string out =
        executor.invoke(node, entry.context, entry.input, entry.problem_id);
    return score_output(out, entry.problem_id);
  };
}

using TaskSampler = std::function<TaskInstance(std::mt19937_64&)>;

struct NodeOptResult {
  CompositeGraph graph;
  HistoryStore history{1000};
  int problems_run = 0;
  int improver_rounds = 0;
};

/// Prompt optimization loop: sample a task, execute the graph, record every
/// node's input/output with the run outcome, and every `update_every`
/// problems apply the improver to each LLM node independently (all other
/// prompts held fixed).
inline NodeOptResult optimize_nodes(const CompositeGraph& graph,
                                    const TaskSampler& sampler,
                                    Executor& executor,
                                    const Improver& improver,
                                    const NodeOptConfig& cfg,
                                    int num_problems) {
  if (cfg.update_every < 1) throw DomainError("update_every must be >= 1");
  NodeOptResult result;
  result.graph = graph;
  result.history = HistoryStore(cfg.history_cap);

  for (int p = 1; p <= num_problems; ++p) {
    std::mt19937_64 task_rng(stable_hash(cfg.seed, "node-opt-task", p));
    const TaskInstance task = sampler(task_rng);
    ExecutionTrace trace;
    try {
      trace = execute(result.graph, render_question(task), executor,
                      task.problem_id);
    } catch (const std::exception& e) {
      throw OptimizationError("node optimization failed at problem " +
                              std::to_string(p) + ": " + e.what());
    }
    const double score =
        canonical_answer(trace.final_output) == canonical_answer(task.gold)
            ? 1.0
            : 0.0;
    std::map<NodeId, double> scores;
    for (const auto& r : trace.records) scores[r.node] = score;
    result.history.record(trace, scores);
    ++result.problems_run;

    if (p % cfg.update_every == 0) {
      for (auto& agent : result.graph.agents) {
        for (auto& node : agent.nodes) {
          if (node.kind != RoutineKind::LlmQuery) continue;
          if (node.description.empty()) continue;
          node.prompt = improver(result.history.history(node.id), node.prompt,
                                 node.description);
        }
      }
      ++result.improver_rounds;
    }
  }
  return result;
}

inline NodeOptResult optimize_nodes(const AgentGraph& graph,
                                    const TaskSampler& sampler,
                                    Executor& executor,
                                    const Improver& improver,
                                    const NodeOptConfig& cfg,
                                    int num_problems) {
  CompositeGraph wrapped;
  wrapped.agents = {graph};
  wrapped.required_edges = graph.required_edges;
  wrapped.output_node = graph.output_node;
  return optimize_nodes(wrapped, sampler, executor, improver, cfg,
                        num_problems);
}

}  // namespace swarmgraph
