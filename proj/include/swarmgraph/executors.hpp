#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "swarmgraph/agents.hpp"
#include "swarmgraph/graph.hpp"
#include "swarmgraph/tasks.hpp"

namespace swarmgraph {

/// Rendered request handed to an LLM-style backend. Rendering is a pure
/// function of (prompt, context order, input); the nonce is filled in by the
/// executor from its seed and the call identity.
struct ExecutorRequest {
  std::string system_prompt;
  std::string user_content;
  double temperature = 0.0;
  NodeId node_id;
  std::uint64_t nonce = 0;
};

/// Deterministic request template. Sections appear in a fixed order
/// (instruction, demonstrations, context entries in canonical order, input),
/// each framed by a reserved "### " header line.
inline ExecutorRequest render_request(const Node& node,
                                      const NodeContext& context,
                                      const std::string& input,
                                      double default_temperature = 0.0) {
  ExecutorRequest req;
  req.node_id = node.id;
  req.system_prompt = node.param("system_prompt");
  const std::string temp_override = node.param("temperature");
  req.temperature =
      temp_override.empty() ? default_temperature : std::stod(temp_override);

  std::string& body = req.user_content;
  if (!node.prompt.instruction.empty()) {
    body += node.prompt.instruction;
    body += "\n";
  }
  for (const auto& demo : node.prompt.demos) {
    body += "### Example input:\n" + demo.input + "\n### Example output:\n" +
            demo.output + "\n";
  }
  for (const auto& entry : context.entries) {
    body += "### Context from " + entry.producer.str() + ":\n" + entry.output +
            "\n";
  }
  body += "### Input:\n" + input;
  return req;
}

/// Evaluates pure-function and decision routines shared by every executor.
/// Throws UnresolvedRoutine for unknown functions.
inline std::string run_builtin(const Node& node, const NodeContext& context,
                               const std::string& input) {
  const std::string fn = node.param(
      "function",
      node.kind == RoutineKind::Decision ? "majority-vote" : "identity");
  if (fn == "identity") {
    return input;
  }
  if (fn == "concat") {
    std::string out;
    for (const auto& e : context.entries) {
      if (!out.empty()) out += "\n";
      out += e.output;
    }
    return out;
  }
  if (fn == "forward") {
    std::vector<std::string> solutions;
    for (const auto& e : context.entries) {
      for (auto& s : split_solutions(e.output)) {
        solutions.push_back(std::move(s));
      }
    }
    return join_solutions(solutions);
  }
  if (fn == "majority-vote") {
    // Votes over the connected predecessors only; with no predecessors the
    // decision abstains with an empty answer.
    if (context.empty()) return "";
    return majority_vote(context.outputs());
  }
  throw UnresolvedRoutine("node " + node.id.str() +
                          ": unknown builtin function '" + fn + "'");
}

// ---------------------------------------------------------------------------
// Mock executor
// ---------------------------------------------------------------------------

/// Behavior knobs of the deterministic mock backend. Every draw is a pure
/// function of (seed, node id, problem id), so replays and concurrent runs
/// produce identical outputs.
struct MockPolicy {
  double truthful_accuracy = 0.85;
  double adversarial_accuracy = 0.0;
  std::vector<std::string> answer_alphabet = {"A", "B", "C", "D"};
  std::uint64_t seed = 0;
};

/// Deterministic stand-in for an LLM backend. Answer nodes resolve against a
/// truth table of task instances; structural routines (branching, propose/
/// critique/revise) synthesize solution payloads; pure and decision nodes
/// bypass the mock entirely.
class MockExecutor : public Executor {
 public:
  explicit MockExecutor(MockPolicy policy = {}) : policy_(policy) {}

  MockExecutor(MockPolicy policy, const std::vector<TaskInstance>& tasks)
      : policy_(policy) {
    add_tasks(tasks);
  }

  void add_tasks(const std::vector<TaskInstance>& tasks) {
    for (const auto& t : tasks) tasks_[t.problem_id] = t;
  }

  const MockPolicy& policy() const { return policy_; }

  /// Number of simulated LLM queries so far.
  long long llm_calls() const { return llm_calls_.load(); }

  std::string invoke(const Node& node, const NodeContext& context,
                     const std::string& input,
                     const std::string& problem_id) override {
    if (node.kind != RoutineKind::LlmQuery) {
      return run_builtin(node, context, input);
    }
    ++llm_calls_;
    const std::string fn = node.param("function", "answer");
    ExecutorRequest req = render_request(node, context, input);
    req.nonce = stable_hash(policy_.seed, node.id.str(), problem_id);
    if (fn == "branch") {
      return branch(node, context, input, req.nonce);
    }
    if (fn == "propose") {
      return "solution(" + node.id.str() + "," + problem_id + ")";
    }
    if (fn == "critique") {
      auto solutions = collect_solutions(context, input);
      solutions.push_back("critique(" + node.id.str() + "," + problem_id + ")");
      return join_solutions(solutions);
    }
    if (fn == "revise") {
      auto solutions = collect_solutions(context, input);
      solutions.push_back("revision(" + node.id.str() + "," + problem_id + ")");
      return join_solutions(solutions);
    }
    if (fn == "echo") {
      return input;
    }
    if (fn == "self-consistency" || fn == "choose-best") {
      // Prompt-based decision strategies degrade to a vote under the mock;
      // without inputs they abstain.
      return context.empty() ? "" : majority_vote(context.outputs());
    }
    if (fn == "answer") {
      return answer(node, req, problem_id);
    }
    throw UnresolvedRoutine("node " + node.id.str() +
                            ": mock cannot handle function '" + fn + "'");
  }

 private:
  std::string answer(const Node& node, const ExecutorRequest& req,
                     const std::string& problem_id) const {
    const auto it = tasks_.find(problem_id);
    if (it == tasks_.end()) {
      throw MissingTruth("no task registered for problem '" + problem_id +
                         "'");
    }
    const TaskInstance& task = it->second;
    const bool adversarial =
        req.user_content.find(kAdversarialMarker) != std::string::npos;
    const double p_correct = adversarial ? policy_.adversarial_accuracy
                                         : policy_.truthful_accuracy;
    const std::vector<std::string>& options =
        task.options.empty() ? policy_.answer_alphabet : task.options;

    const double draw = unit_interval(req.nonce);
    if (draw < p_correct) return task.gold;

    std::vector<std::string> wrong;
    for (const auto& o : options) {
      if (o != task.gold) wrong.push_back(o);
    }
    if (wrong.empty()) return task.gold;
    const std::uint64_t pick = stable_hash(req.nonce, "wrong-option");
    return wrong[pick % wrong.size()];
  }

  std::string branch(const Node& node, const NodeContext& context,
                     const std::string& input, std::uint64_t nonce) const {
    static constexpr std::size_t kMaxSolutions = 1024;
    const int branching = std::stoi(node.param("branching", "2"));
    const std::vector<std::string> inputs = collect_solutions(context, input);
    std::vector<std::string> out;
    for (const auto& s : inputs) {
      for (int b = 0; b < branching; ++b) {
        if (out.size() >= kMaxSolutions) break;
        out.push_back(s + "/" + std::to_string(b));
      }
    }
    (void)nonce;
    return join_solutions(out);
  }

  static std::vector<std::string> collect_solutions(const NodeContext& context,
                                                    const std::string& input) {
    if (context.empty()) return {input};
    std::vector<std::string> out;
    for (const auto& e : context.entries) {
      for (auto& s : split_solutions(e.output)) out.push_back(std::move(s));
    }
    return out;
  }

  MockPolicy policy_;
  std::map<std::string, TaskInstance> tasks_;
  std::atomic<long long> llm_calls_{0};
};

/// Adapter turning a callable into an executor; pure and decision routines
/// still resolve through the shared builtins. Intended for tests.
class FunctionExecutor : public Executor {
 public:
  using Fn = std::function<std::string(const Node&, const NodeContext&,
                                       const std::string& input,
                                       const std::string& problem_id)>;

  explicit FunctionExecutor(Fn fn) : fn_(std::move(fn)) {}

  std::string invoke(const Node& node, const NodeContext& context,
                     const std::string& input,
                     const std::string& problem_id) override {
    if (node.kind != RoutineKind::LlmQuery) {
      return run_builtin(node, context, input);
    }
    return fn_(node, context, input, problem_id);
  }

 private:
  Fn fn_;
};

}  // namespace swarmgraph
