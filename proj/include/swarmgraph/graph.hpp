#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "swarmgraph/errors.hpp"
#include "swarmgraph/util.hpp"

namespace swarmgraph {

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// Globally unique node identifier: the owning agent plus a local name.
/// Ordering is lexicographic on (agent, local); it fixes every tie-break in
/// the library (topological order, context order, canonical edge order).
struct NodeId {
  std::string agent;
  std::string local;

  auto operator<=>(const NodeId&) const = default;

  std::string str() const { return agent + ":" + local; }

  /// Parses "agent:local". The agent part must not contain ':'.
  static NodeId parse(const std::string& s) {
    const auto pos = s.find(':');
    if (pos == std::string::npos) {
      throw DomainError("node id must have the form agent:local, got '" + s +
                        "'");
    }
    return NodeId{s.substr(0, pos), s.substr(pos + 1)};
  }
};

using Edge = std::pair<NodeId, NodeId>;

inline std::string edge_str(const Edge& e) {
  return e.first.str() + "->" + e.second.str();
}

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

/// One demonstration example attached to a prompt.
struct DemoExample {
  std::string input;
  std::string output;
  bool positive = true;

  bool operator==(const DemoExample&) const = default;
};

/// A node prompt: free instruction text plus an ordered demonstration list.
/// Rendering to text is deterministic so repeated executions are bit-stable.
struct Prompt {
  std::string instruction;
  std::vector<DemoExample> demos;

  bool operator==(const Prompt&) const = default;

  bool empty() const { return instruction.empty() && demos.empty(); }

  /// Appends a demo, evicting the oldest when the cap is exceeded.
  void append_demo(const DemoExample& demo, std::size_t max_demos) {
    demos.push_back(demo);
    while (demos.size() > max_demos) demos.erase(demos.begin());
  }

  std::string render() const {
    std::string out = instruction;
    for (const auto& d : demos) {
      if (!out.empty()) out += "\n";
      out += "### Example input:\n" + d.input + "\n### Example output:\n" +
             d.output;
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Nodes and graphs
// ---------------------------------------------------------------------------

enum class RoutineKind { LlmQuery, PureFunction, Decision };

inline std::string to_string(RoutineKind k) {
  switch (k) {
    case RoutineKind::LlmQuery: return "llm-query";
    case RoutineKind::PureFunction: return "pure-function";
    case RoutineKind::Decision: return "decision";
  }
  return "llm-query";
}

inline RoutineKind routine_kind_from_string(const std::string& s) {
  if (s == "llm-query") return RoutineKind::LlmQuery;
  if (s == "pure-function") return RoutineKind::PureFunction;
  if (s == "decision") return RoutineKind::Decision;
  throw DomainError("unknown routine kind '" + s + "'");
}

/// One computational node. `description` states the intended function (used
/// by prompt improvers); `params` holds routine-specific settings such as
/// "function", "branching" or "system_prompt".
struct Node {
  NodeId id;
  std::string description;
  Prompt prompt;
  RoutineKind kind = RoutineKind::LlmQuery;
  std::map<std::string, std::string> params;

  bool operator==(const Node&) const = default;

  std::string param(const std::string& key,
                    const std::string& fallback = "") const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

/// A single agent: a DAG of nodes with one designated output node.
struct AgentGraph {
  std::string agent_id;
  std::vector<Node> nodes;
  std::set<Edge> required_edges;
  NodeId output_node;

  bool operator==(const AgentGraph&) const = default;

  const Node* find_node(const NodeId& id) const {
    for (const auto& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  Node* find_node(const NodeId& id) {
    for (auto& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  std::set<NodeId> node_ids() const {
    std::set<NodeId> ids;
    for (const auto& n : nodes) ids.insert(n.id);
    return ids;
  }

  void validate() const;
};

/// A swarm: the union of several agents, required edges (agent-internal plus
/// mandated cross-agent ones), and an ordered list of candidate cross-agent
/// edges whose inclusion is subject to optimization.
struct CompositeGraph {
  std::vector<AgentGraph> agents;
  std::set<Edge> required_edges;
  std::vector<Edge> potential_edges;
  NodeId output_node;

  bool operator==(const CompositeGraph&) const = default;

  const AgentGraph* find_agent(const std::string& id) const {
    for (const auto& a : agents) {
      if (a.agent_id == id) return &a;
    }
    return nullptr;
  }

  const Node* find_node(const NodeId& id) const {
    const AgentGraph* a = find_agent(id.agent);
    return a ? a->find_node(id) : nullptr;
  }

  Node* find_node(const NodeId& id) {
    for (auto& a : agents) {
      if (a.agent_id == id.agent) return a.find_node(id);
    }
    return nullptr;
  }

  /// All node ids in canonical (ascending) order.
  std::set<NodeId> node_ids() const {
    std::set<NodeId> ids;
    for (const auto& a : agents) {
      for (const auto& n : a.nodes) ids.insert(n.id);
    }
    return ids;
  }

  std::vector<const Node*> all_nodes() const {
    std::vector<const Node*> out;
    for (const auto& a : agents) {
      for (const auto& n : a.nodes) out.push_back(&n);
    }
    return out;
  }

  std::size_t node_count() const {
    std::size_t n = 0;
    for (const auto& a : agents) n += a.nodes.size();
    return n;
  }

  void validate() const;
};

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct ContextEntry {
  NodeId producer;
  std::string output;

  bool operator==(const ContextEntry&) const = default;
};

/// Context delivered to a node: predecessor outputs ordered by the producer's
/// topological rank, ties broken by NodeId. Empty for source nodes.
struct NodeContext {
  std::vector<ContextEntry> entries;

  bool operator==(const NodeContext&) const = default;

  bool empty() const { return entries.empty(); }

  std::vector<std::string> outputs() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.output);
    return out;
  }
};

struct TraceRecord {
  NodeId node;
  std::string input;
  NodeContext context;
  std::string prompt_text;
  std::string output;

  bool operator==(const TraceRecord&) const = default;
};

/// Full record of one graph run, one record per executed node in evaluation
/// order. `final_output` equals the output node's recorded output.
struct ExecutionTrace {
  std::string problem_id;
  std::vector<TraceRecord> records;
  std::string final_output;

  bool operator==(const ExecutionTrace&) const = default;

  const TraceRecord* record_for(const NodeId& id) const {
    for (const auto& r : records) {
      if (r.node == id) return &r;
    }
    return nullptr;
  }
};

/// Resolves node routines during execution. Implementations must be safe to
/// call concurrently; all state they consult is either immutable or keyed by
/// (node, problem) so replays are exact.
class Executor {
 public:
  virtual ~Executor() = default;

  virtual std::string invoke(const Node& node, const NodeContext& context,
                             const std::string& input,
                             const std::string& problem_id) = 0;
};

// ---------------------------------------------------------------------------
// Graph algorithms
// ---------------------------------------------------------------------------

/// True iff the directed graph over `nodes` has no cycle (Kahn's algorithm).
/// Throws UnknownNode if an edge endpoint is not in `nodes`.
inline bool validate_dag(const std::set<NodeId>& nodes,
                         const std::set<Edge>& edges) {
  std::map<NodeId, std::size_t> in_degree;
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& n : nodes) in_degree[n] = 0;
  for (const auto& [u, v] : edges) {
    if (!nodes.count(u)) throw UnknownNode("edge source not in node set: " + u.str());
    if (!nodes.count(v)) throw UnknownNode("edge target not in node set: " + v.str());
    succ[u].push_back(v);
    ++in_degree[v];
  }
  std::vector<NodeId> ready;
  for (const auto& [n, deg] : in_degree) {
    if (deg == 0) ready.push_back(n);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const NodeId n = ready.back();
    ready.pop_back();
    ++visited;
    for (const auto& v : succ[n]) {
      if (--in_degree[v] == 0) ready.push_back(v);
    }
  }
  return visited == nodes.size();
}

/// Deterministic topological order: a node appears after all predecessors;
/// independent nodes are ordered by NodeId ascending.
inline std::vector<NodeId> topological_sort(const std::set<NodeId>& nodes,
                                            const std::set<Edge>& edges) {
  std::map<NodeId, std::size_t> in_degree;
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& n : nodes) in_degree[n] = 0;
  for (const auto& [u, v] : edges) {
    if (!nodes.count(u)) throw UnknownNode("edge source not in node set: " + u.str());
    if (!nodes.count(v)) throw UnknownNode("edge target not in node set: " + v.str());
    succ[u].push_back(v);
    ++in_degree[v];
  }
  std::set<NodeId> ready;
  for (const auto& [n, deg] : in_degree) {
    if (deg == 0) ready.insert(n);
  }
  std::vector<NodeId> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    const NodeId n = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto& v : succ[n]) {
      if (--in_degree[v] == 0) ready.insert(v);
    }
  }
  if (order.size() != nodes.size()) {
    throw CycleDetected("graph contains a cycle");
  }
  return order;
}

inline std::vector<NodeId> topological_sort(const AgentGraph& g) {
  return topological_sort(g.node_ids(), g.required_edges);
}

inline std::vector<NodeId> topological_sort(const CompositeGraph& g) {
  return topological_sort(g.node_ids(), g.required_edges);
}

inline void AgentGraph::validate() const {
  if (agent_id.find(':') != std::string::npos) {
    throw DomainError("agent id must not contain ':': " + agent_id);
  }
  std::set<NodeId> ids;
  for (const auto& n : nodes) {
    if (n.id.agent != agent_id) {
      throw DomainError("node " + n.id.str() + " does not belong to agent " +
                        agent_id);
    }
    if (n.id.local.find(':') != std::string::npos) {
      throw DomainError("node local id must not contain ':': " + n.id.str());
    }
    if (!ids.insert(n.id).second) {
      throw DomainError("duplicate node id " + n.id.str());
    }
  }
  if (!ids.count(output_node)) {
    throw UnknownNode("output node " + output_node.str() +
                      " is not part of agent " + agent_id);
  }
  if (!validate_dag(ids, required_edges)) {
    throw CycleDetected("agent " + agent_id + " is not a DAG");
  }
}

inline void CompositeGraph::validate() const {
  std::set<std::string> agent_ids;
  for (const auto& a : agents) {
    a.validate();
    if (!agent_ids.insert(a.agent_id).second) {
      throw DomainError("duplicate agent id " + a.agent_id);
    }
  }
  const std::set<NodeId> ids = node_ids();
  if (!ids.count(output_node)) {
    throw UnknownNode("composite output node " + output_node.str() +
                      " not found");
  }
  for (const auto& [u, v] : required_edges) {
    if (!ids.count(u) || !ids.count(v)) {
      throw UnknownNode("required edge endpoint missing: " + edge_str({u, v}));
    }
    if (u == output_node) {
      throw DomainError("required edge must not leave the output node: " +
                        edge_str({u, v}));
    }
  }
  if (!validate_dag(ids, required_edges)) {
    throw CycleDetected("required composite graph is not a DAG");
  }
  std::set<Edge> seen;
  for (const auto& e : potential_edges) {
    const auto& [u, v] = e;
    if (!ids.count(u) || !ids.count(v)) {
      throw UnknownNode("potential edge endpoint missing: " + edge_str(e));
    }
    if (u.agent == v.agent) {
      throw DomainError("potential edge must connect different agents: " +
                        edge_str(e));
    }
    if (u == output_node) {
      throw DomainError("potential edge must not leave the output node: " +
                        edge_str(e));
    }
    if (required_edges.count(e)) {
      throw DomainError("potential edge duplicates a required edge: " +
                        edge_str(e));
    }
    if (!seen.insert(e).second) {
      throw DomainError("duplicate potential edge: " + edge_str(e));
    }
  }
}

namespace detail {

inline ExecutionTrace execute_impl(const std::vector<const Node*>& nodes,
                                   const std::set<Edge>& edges,
                                   const NodeId& output_node,
                                   const std::string& input, Executor& executor,
                                   std::string problem_id) {
  std::set<NodeId> ids;
  std::map<NodeId, const Node*> by_id;
  for (const Node* n : nodes) {
    ids.insert(n->id);
    by_id[n->id] = n;
  }
  if (!ids.count(output_node)) {
    throw UnknownNode("output node " + output_node.str() + " not found");
  }
  const std::vector<NodeId> order = topological_sort(ids, edges);
  std::map<NodeId, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

  std::map<NodeId, std::vector<NodeId>> preds;
  for (const auto& [u, v] : edges) preds[v].push_back(u);

  if (problem_id.empty()) {
    problem_id = "input-" + std::to_string(stable_hash("input", input));
  }

  ExecutionTrace trace;
  trace.problem_id = problem_id;
  std::map<NodeId, std::string> outputs;
  for (const NodeId& id : order) {
    const Node& node = *by_id.at(id);
    NodeContext ctx;
    auto ps = preds[id];
    std::sort(ps.begin(), ps.end(), [&](const NodeId& a, const NodeId& b) {
      return std::pair(rank.at(a), a) < std::pair(rank.at(b), b);
    });
    for (const NodeId& p : ps) ctx.entries.push_back({p, outputs.at(p)});

    std::string out;
    try {
      out = executor.invoke(node, ctx, input, problem_id);
    } catch (const UnresolvedRoutine&) {
      throw;
    } catch (const std::exception& e) {
      throw RoutineFailure("node " + id.str() + " failed: " + e.what());
    }
    outputs[id] = out;
    trace.records.push_back({id, input, std::move(ctx),
                             node.prompt.render(), std::move(out)});
  }
  trace.final_output = outputs.at(output_node);
  return trace;
}

}  // namespace detail

/// Runs a graph on one input: nodes are evaluated in deterministic
/// topological order, each receiving the run input plus its predecessors'
/// outputs. Any routine failure aborts the run and names the failing node.
inline ExecutionTrace execute(const AgentGraph& g, const std::string& input,
                              Executor& executor,
                              const std::string& problem_id = "") {
  std::vector<const Node*> nodes;
  for (const auto& n : g.nodes) nodes.push_back(&n);
  return detail::execute_impl(nodes, g.required_edges, g.output_node, input,
                              executor, problem_id);
}

/// Composite execution uses the required edges only; merge realized edges
/// with prune() first.
inline ExecutionTrace execute(const CompositeGraph& g, const std::string& input,
                              Executor& executor,
                              const std::string& problem_id = "") {
  return detail::execute_impl(g.all_nodes(), g.required_edges, g.output_node,
                              input, executor, problem_id);
}

/// Builds a swarm from agents. Required edges are the union of the agents'
/// edges plus `mandated_edges`; potential edges are all remaining ordered
/// cross-agent pairs except those leaving the composite output node, listed
/// in canonical lexicographic order.
inline CompositeGraph compose(const std::vector<AgentGraph>& agents,
                              std::size_t output_agent_index,
                              const std::set<Edge>& mandated_edges = {}) {
  if (agents.empty()) throw DomainError("compose requires at least one agent");
  if (output_agent_index >= agents.size()) {
    throw DomainError("output agent index out of range");
  }
  CompositeGraph g;
  g.agents = agents;
  g.output_node = agents[output_agent_index].output_node;
  for (const auto& a : agents) {
    for (const auto& e : a.required_edges) g.required_edges.insert(e);
  }
  const std::set<NodeId> ids = g.node_ids();
  for (const auto& e : mandated_edges) {
    const auto& [u, v] = e;
    if (!ids.count(u) || !ids.count(v)) {
      throw UnknownNode("mandated edge endpoint missing: " + edge_str(e));
    }
    if (u.agent == v.agent) {
      throw DomainError("mandated edge must connect different agents: " +
                        edge_str(e));
    }
    g.required_edges.insert(e);
  }
  if (!validate_dag(ids, g.required_edges)) {
    throw CycleDetected("mandated edges break acyclicity");
  }
  for (const NodeId& u : ids) {
    if (u == g.output_node) continue;
    for (const NodeId& v : ids) {
      if (u.agent == v.agent) continue;
      const Edge e{u, v};
      if (g.required_edges.count(e)) continue;
      g.potential_edges.push_back(e);
    }
  }
  g.validate();
  return g;
}

/// Removes every node without a directed path to the output node, given the
/// required edges plus `realized_edges`, and merges the realized edges into
/// the result's required set. The result is a concrete graph (no remaining
/// potential edges); pruning it again is a no-op.
inline CompositeGraph prune(const CompositeGraph& g,
                            const std::set<Edge>& realized_edges) {
  const std::set<Edge> potential(g.potential_edges.begin(),
                                 g.potential_edges.end());
  for (const auto& e : realized_edges) {
    if (!potential.count(e)) {
      throw DomainError("realized edge is not a potential edge: " +
                        edge_str(e));
    }
  }
  std::set<Edge> edges = g.required_edges;
  edges.insert(realized_edges.begin(), realized_edges.end());

  std::map<NodeId, std::vector<NodeId>> rev;
  for (const auto& [u, v] : edges) rev[v].push_back(u);
  std::set<NodeId> kept;
  std::vector<NodeId> stack{g.output_node};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (!kept.insert(n).second) continue;
    for (const auto& p : rev[n]) stack.push_back(p);
  }

  CompositeGraph out;
  out.output_node = g.output_node;
  for (const auto& a : g.agents) {
    AgentGraph pa;
    pa.agent_id = a.agent_id;
    for (const auto& n : a.nodes) {
      if (kept.count(n.id)) pa.nodes.push_back(n);
    }
    if (pa.nodes.empty()) continue;
    for (const auto& e : a.required_edges) {
      if (kept.count(e.first) && kept.count(e.second)) {
        pa.required_edges.insert(e);
      }
    }
    // The agent-level output may itself be pruned away; fall back to the
    // first kept node so the sub-graph stays well formed.
    pa.output_node = kept.count(a.output_node) ? a.output_node
                                               : pa.nodes.front().id;
    out.agents.push_back(std::move(pa));
  }
  for (const auto& e : edges) {
    if (kept.count(e.first) && kept.count(e.second)) {
      out.required_edges.insert(e);
    }
  }
  return out;
}

}  // namespace swarmgraph
