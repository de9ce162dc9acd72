#pragma once

// Shared fixtures and independent oracles for the test suite. The oracles
// (cycle check, product-form enumeration) are written against plain edge
// lists so they do not share code with the library paths they verify.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "swarmgraph/swarmgraph.hpp"

namespace sgtest {

using namespace swarmgraph;

/// One-node agent. Defaults to a pure identity routine so structural tests
/// run without a backend.
inline AgentGraph tiny_agent(const std::string& id,
                             RoutineKind kind = RoutineKind::PureFunction,
                             const std::string& function = "identity") {
  AgentGraph g;
  g.agent_id = id;
  Node n;
  n.id = {id, "n"};
  n.description = "test node " + id;
  n.kind = kind;
  if (!function.empty()) n.params["function"] = function;
  g.nodes.push_back(std::move(n));
  g.output_node = {id, "n"};
  return g;
}

inline NodeId nid(const std::string& agent, const std::string& local = "n") {
  return NodeId{agent, local};
}

/// Composite with agents a, b and output agent out, and exactly the mutually
/// cyclic candidate pair [(a,b), (b,a)]. Used by the sampler tests.
inline CompositeGraph mutual_pair_composite() {
  CompositeGraph g;
  g.agents = {tiny_agent("a"), tiny_agent("b"), tiny_agent("out")};
  g.output_node = nid("out");
  g.potential_edges = {{nid("a"), nid("b")}, {nid("b"), nid("a")}};
  g.validate();
  return g;
}

/// Composite of n one-node agents plus an output agent, with every ordered
/// cross pair among the n agents as a candidate edge (cycle-rich).
inline CompositeGraph cross_composite(int n_agents) {
  CompositeGraph g;
  std::vector<std::string> ids;
  for (int i = 0; i < n_agents; ++i) {
    ids.push_back("g" + std::to_string(i));
    g.agents.push_back(tiny_agent(ids.back()));
  }
  g.agents.push_back(tiny_agent("out"));
  g.output_node = nid("out");
  for (const auto& u : ids) {
    for (const auto& v : ids) {
      if (u != v) g.potential_edges.push_back({nid(u), nid(v)});
    }
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Test-local oracles
// ---------------------------------------------------------------------------

/// Independent reachability check by plain DFS over an edge list.
inline bool oracle_has_path(const std::set<Edge>& edges, const NodeId& from,
                            const NodeId& to) {
  if (from == to) return true;
  std::set<NodeId> seen{from};
  std::vector<NodeId> stack{from};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (const auto& [u, v] : edges) {
      if (u == n && !seen.count(v)) {
        if (v == to) return true;
        seen.insert(v);
        stack.push_back(v);
      }
    }
  }
  return false;
}

/// Independent acyclicity check: repeatedly remove nodes with no incoming
/// edge.
inline bool oracle_is_acyclic(std::set<NodeId> nodes, std::set<Edge> edges) {
  bool changed = true;
  while (changed && !nodes.empty()) {
    changed = false;
    for (const auto& n : nodes) {
      bool has_in = false;
      for (const auto& [u, v] : edges) {
        if (v == n) {
          has_in = true;
          break;
        }
      }
      if (!has_in) {
        std::set<Edge> remaining;
        for (const auto& e : edges) {
          if (e.first != n) remaining.insert(e);
        }
        edges = std::move(remaining);
        nodes.erase(n);
        changed = true;
        break;
      }
    }
  }
  return nodes.empty();
}

struct OracleMask {
  std::vector<std::uint8_t> included;
  double probability = 0.0;
};

/// Enumerates all sampler-reachable masks with their exact probabilities via
/// the product form, replaying eligibility with the oracle path check.
inline std::vector<OracleMask> oracle_enumerate_masks(
    const CompositeGraph& g, const std::vector<double>& probs) {
  const std::size_t d = g.potential_edges.size();
  std::vector<OracleMask> out;
  for (std::size_t bits = 0; bits < (std::size_t{1} << d); ++bits) {
    std::vector<std::uint8_t> mask(d, 0);
    for (std::size_t i = 0; i < d; ++i) mask[i] = (bits >> i) & 1U;
    std::set<Edge> current = g.required_edges;
    double p = 1.0;
    bool reachable = true;
    for (std::size_t i = 0; i < d; ++i) {
      const Edge& e = g.potential_edges[i];
      const bool cycle = oracle_has_path(current, e.second, e.first);
      if (cycle) {
        if (mask[i]) {
          reachable = false;
          break;
        }
        continue;
      }
      if (mask[i]) {
        p *= probs[i];
        current.insert(e);
      } else {
        p *= 1.0 - probs[i];
      }
    }
    if (reachable) out.push_back({std::move(mask), p});
  }
  return out;
}

}  // namespace sgtest
