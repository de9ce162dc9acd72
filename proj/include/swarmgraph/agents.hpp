#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmgraph/graph.hpp"

namespace swarmgraph {

// ---------------------------------------------------------------------------
// Default prompt templates. These ship as optional defaults; builders attach
// them but callers may overwrite any prompt.
// ---------------------------------------------------------------------------

inline constexpr const char* kQaSystemPrompt =
    "You are a knowledgeable expert in question answering. I will ask you a "
    "question. I will also give you 4 answers enumerated as A, B, C and D. "
    "Only one answer out of the offered 4 is correct. You must choose the "
    "correct answer to the question. Your response must be one of the 4 "
    "letters: A, B, C or D, corresponding to the correct answer. Only one "
    "letter (A, B, C or D) is allowed in your answer.";

/// Marker prefix of the adversarial template; executors detect adversarial
/// behavior from the rendered request, not from a node flag.
inline constexpr const char* kAdversarialMarker =
    "Answer a lie to the following question:";

inline constexpr const char* kSelfConsistencyPrompt =
    "# Self-Consistency Evaluation Task\n"
    "Review the question and the candidate answers provided as context. "
    "Compare the answers for adherence to the question and logical "
    "consistency, then copy the most consistent answer exactly as it is, "
    "without modification.";

inline constexpr const char* kChooseBestPrompt =
    "## Candidate Answers for Evaluation\n"
    "Examine the question and each candidate answer provided as context. "
    "Choose the answer that most accurately and completely addresses the "
    "question and copy it exactly as it is presented.";

/// Roles that can be assigned to IO agents; mirrored by data/roles.json.
inline const std::vector<std::string>& default_io_roles() {
  static const std::vector<std::string> roles = {
      "Botanist",       "Data Scientist",   "Social Worker",
      "Journalist",     "Pilot",            "Anthropologist",
      "Fitness Coach",  "Politician",       "Artist",
      "Marine Biologist", "Ethicist",       "Entrepreneur",
      "Linguist",       "Archaeologist",    "Nurse",
      "Graphic Designer", "Philanthropist", "Meteorologist",
      "Sommelier",      "Cybersecurity Expert"};
  return roles;
}

// ---------------------------------------------------------------------------
// Decision strategies
// ---------------------------------------------------------------------------

enum class DecisionKind {
  MajorityVote,
  SelfConsistencyPrompt,
  ChooseBestPrompt,
};

inline std::string to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::MajorityVote: return "majority_vote";
    case DecisionKind::SelfConsistencyPrompt: return "self_consistency";
    case DecisionKind::ChooseBestPrompt: return "choose_best";
  }
  return "majority_vote";
}

inline DecisionKind decision_kind_from_string(const std::string& s) {
  if (s == "majority_vote") return DecisionKind::MajorityVote;
  if (s == "self_consistency") return DecisionKind::SelfConsistencyPrompt;
  if (s == "choose_best") return DecisionKind::ChooseBestPrompt;
  throw DomainError("unknown decision strategy '" + s + "'");
}

/// Most frequent answer after canonicalization (trim + case-fold); ties go to
/// the lexicographically smallest canonical answer, which keeps the vote
/// permutation-invariant.
inline std::string majority_vote(const std::vector<std::string>& answers) {
  if (answers.empty()) {
    throw EmptyInput("majority_vote requires at least one answer");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& a : answers) ++counts[canonical_answer(a)];
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [answer, count] : counts) {
    if (count > best_count) {
      best = answer;
      best_count = count;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Agent builders. Builders are pure: the same arguments produce structurally
// identical graphs with the same node ids.
// ---------------------------------------------------------------------------

/// Single-node agent that relays an LLM answer. An optional role is prefixed
/// to the system prompt.
inline AgentGraph build_io_agent(const std::string& agent_id,
                                 const std::optional<std::string>& role = {}) {
  AgentGraph g;
  g.agent_id = agent_id;
  Node n;
  n.id = {agent_id, "answer"};
  n.description = "Answers the question directly.";
  n.kind = RoutineKind::LlmQuery;
  std::string system = kQaSystemPrompt;
  if (role && !role->empty()) {
    system = "You are a " + *role + ". " + system;
  }
  n.params["system_prompt"] = system;
  g.nodes.push_back(std::move(n));
  g.output_node = {agent_id, "answer"};
  g.validate();
  return g;
}

/// Single-node agent whose template asks for a deliberately wrong answer.
inline AgentGraph build_adversarial_agent(const std::string& agent_id) {
  AgentGraph g;
  g.agent_id = agent_id;
  Node n;
  n.id = {agent_id, "answer"};
  n.description = "Answers the question with a deliberately wrong option.";
  n.kind = RoutineKind::LlmQuery;
  n.prompt.instruction = kAdversarialMarker;
  n.params["system_prompt"] = kQaSystemPrompt;
  g.nodes.push_back(std::move(n));
  g.output_node = {agent_id, "answer"};
  g.validate();
  return g;
}

/// Linear chain of reasoning steps; the last step is the agent output.
inline AgentGraph build_cot_chain(const std::string& agent_id, int steps) {
  if (steps < 1) throw DomainError("cot chain needs at least one step");
  AgentGraph g;
  g.agent_id = agent_id;
  for (int i = 0; i < steps; ++i) {
    Node n;
    n.id = {agent_id, "step" + std::to_string(i)};
    n.description = "Reasoning step " + std::to_string(i + 1) + " of " +
                    std::to_string(steps) + ".";
    n.kind = RoutineKind::LlmQuery;
    n.prompt.instruction =
        "Think step by step. Refine the partial solution from the context "
        "and continue toward the final answer.";
    if (i > 0) {
      g.required_edges.insert(
          {{agent_id, "step" + std::to_string(i - 1)}, n.id});
    }
    g.nodes.push_back(std::move(n));
  }
  g.output_node = {agent_id, "step" + std::to_string(steps - 1)};
  g.validate();
  return g;
}

/// Tree search realized as a chain of branching nodes: each node emits
/// `branching` candidate solutions per input solution, so the solution
/// multiplicity lives in the payload instead of in graph fan-out.
inline AgentGraph build_tot_chain(const std::string& agent_id, int depth,
                                  int branching = 2) {
  if (depth < 1) throw DomainError("tot chain needs depth >= 1");
  if (branching < 2) throw DomainError("tot chain needs branching >= 2");
  AgentGraph g;
  g.agent_id = agent_id;
  for (int i = 0; i < depth; ++i) {
    Node n;
    n.id = {agent_id, "branch" + std::to_string(i)};
    n.description = "Expands every candidate solution into " +
                    std::to_string(branching) + " refined candidates.";
    n.kind = RoutineKind::LlmQuery;
    n.prompt.instruction =
        "For every candidate solution in the context, propose " +
        std::to_string(branching) + " refined candidate solutions.";
    n.params["function"] = "branch";
    n.params["branching"] = std::to_string(branching);
    if (i > 0) {
      g.required_edges.insert(
          {{agent_id, "branch" + std::to_string(i - 1)}, n.id});
    }
    g.nodes.push_back(std::move(n));
  }
  g.output_node = {agent_id, "branch" + std::to_string(depth - 1)};
  g.validate();
  return g;
}

/// Propose -> critique -> revise chain. The revise output carries the
/// original solutions alongside the revision.
inline AgentGraph build_reflexion_agent(const std::string& agent_id) {
  AgentGraph g;
  g.agent_id = agent_id;
  const auto add = [&](const std::string& local, const std::string& desc,
                       const std::string& instruction,
                       const std::string& function) {
    Node n;
    n.id = {agent_id, local};
    n.description = desc;
    n.kind = RoutineKind::LlmQuery;
    n.prompt.instruction = instruction;
    n.params["function"] = function;
    g.nodes.push_back(std::move(n));
  };
  add("propose", "Proposes an initial solution greedily.",
      "Propose a solution to the task.", "propose");
  add("critique", "Criticizes the proposed solution.",
      "Point out weaknesses in the proposed solution from the context.",
      "critique");
  add("revise", "Produces an alternative solution informed by the critique.",
      "Using the critique in the context, produce an improved alternative "
      "solution. Keep the original solutions alongside the new one.",
      "revise");
  g.required_edges.insert({{agent_id, "propose"}, {agent_id, "critique"}});
  g.required_edges.insert({{agent_id, "critique"}, {agent_id, "revise"}});
  g.output_node = {agent_id, "revise"};
  g.validate();
  return g;
}

/// The virtual decision node aggregating agent answers. Majority voting is a
/// pure function of the predecessor outputs; the prompt-based strategies are
/// LLM queries carrying the corresponding template.
inline Node build_decision_node(DecisionKind kind,
                                const std::string& agent_id = "decision") {
  Node n;
  n.id = {agent_id, "decide"};
  switch (kind) {
    case DecisionKind::MajorityVote:
      n.description = "Selects the most frequent predecessor answer.";
      n.kind = RoutineKind::PureFunction;
      n.params["function"] = "majority-vote";
      break;
    case DecisionKind::SelfConsistencyPrompt:
      n.description = "Selects the most self-consistent predecessor answer.";
      n.kind = RoutineKind::LlmQuery;
      n.prompt.instruction = kSelfConsistencyPrompt;
      n.params["function"] = "self-consistency";
      break;
    case DecisionKind::ChooseBestPrompt:
      n.description = "Selects the best predecessor answer.";
      n.kind = RoutineKind::LlmQuery;
      n.prompt.instruction = kChooseBestPrompt;
      n.params["function"] = "choose-best";
      break;
  }
  return n;
}

/// One-node agent wrapping a decision node, usable as a composite output.
inline AgentGraph build_decision_agent(const std::string& agent_id,
                                       DecisionKind kind) {
  AgentGraph g;
  g.agent_id = agent_id;
  g.nodes.push_back(build_decision_node(kind, agent_id));
  g.output_node = g.nodes.front().id;
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

enum class AgentKind { Io, Adversarial, Cot, Tot, Reflexion };

inline std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Io: return "io";
    case AgentKind::Adversarial: return "adversarial";
    case AgentKind::Cot: return "cot";
    case AgentKind::Tot: return "tot";
    case AgentKind::Reflexion: return "reflexion";
  }
  return "io";
}

inline AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "io") return AgentKind::Io;
  if (s == "adversarial") return AgentKind::Adversarial;
  if (s == "cot") return AgentKind::Cot;
  if (s == "tot") return AgentKind::Tot;
  if (s == "reflexion") return AgentKind::Reflexion;
  throw DomainError("unknown agent kind '" + s + "'");
}

/// Declarative agent description suitable for config files.
struct AgentTemplate {
  AgentKind kind = AgentKind::Io;
  std::map<std::string, std::string> params;

  bool operator==(const AgentTemplate&) const = default;
};

inline AgentGraph build_agent(const AgentTemplate& tpl,
                              const std::string& agent_id) {
  const auto param = [&](const std::string& key, int fallback) {
    const auto it = tpl.params.find(key);
    return it == tpl.params.end() ? fallback : std::stoi(it->second);
  };
  switch (tpl.kind) {
    case AgentKind::Io: {
      const auto it = tpl.params.find("role");
      if (it != tpl.params.end() && !it->second.empty()) {
        return build_io_agent(agent_id, it->second);
      }
      return build_io_agent(agent_id);
    }
    case AgentKind::Adversarial:
      return build_adversarial_agent(agent_id);
    case AgentKind::Cot:
      return build_cot_chain(agent_id, param("steps", 3));
    case AgentKind::Tot:
      return build_tot_chain(agent_id, param("depth", 8), param("branching", 2));
    case AgentKind::Reflexion:
      return build_reflexion_agent(agent_id);
  }
  throw DomainError("unknown agent kind");
}

}  // namespace swarmgraph
