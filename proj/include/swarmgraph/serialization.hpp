#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmgraph/agents.hpp"
#include "swarmgraph/edge_distribution.hpp"
#include "swarmgraph/graph.hpp"
#include "swarmgraph/node_opt.hpp"
#include "swarmgraph/reinforce.hpp"

namespace swarmgraph {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Graph definition files
//
// {
//   "agents": [{"id", "nodes": [{"id", "kind", "description", "prompt",
//                                "params"}],
//               "edges": [[src_local, dst_local]], "output": local}],
//   "mandated_edges": [["agent:local", "agent:local"]],
//   "output_agent": "agent-id"
// }
// ---------------------------------------------------------------------------

/// The construction inputs of a composite graph. Persisting the inputs (and
/// recomputing the potential edges on load) keeps round-trips lossless.
struct GraphDefinition {
  std::vector<AgentGraph> agents;
  std::set<Edge> mandated_edges;
  std::string output_agent;

  bool operator==(const GraphDefinition&) const = default;

  CompositeGraph to_composite() const {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (agents[i].agent_id == output_agent) {
        return compose(agents, i, mandated_edges);
      }
    }
    throw DomainError("output agent '" + output_agent + "' not found");
  }
};

inline json prompt_to_json(const Prompt& p) {
  json demos = json::array();
  for (const auto& d : p.demos) {
    demos.push_back(
        {{"in", d.input}, {"out", d.output}, {"positive", d.positive}});
  }
  return {{"instruction", p.instruction}, {"demos", demos}};
}

inline Prompt prompt_from_json(const json& j) {
  Prompt p;
  p.instruction = j.value("instruction", "");
  for (const auto& d : j.value("demos", json::array())) {
    p.demos.push_back({d.at("in").get<std::string>(),
                       d.at("out").get<std::string>(),
                       d.value("positive", true)});
  }
  return p;
}

inline json graph_definition_to_json(const GraphDefinition& def) {
  json agents = json::array();
  for (const auto& a : def.agents) {
    json nodes = json::array();
    for (const auto& n : a.nodes) {
      json params = json::object();
      for (const auto& [k, v] : n.params) params[k] = v;
      nodes.push_back({{"id", n.id.local},
                       {"kind", to_string(n.kind)},
                       {"description", n.description},
                       {"prompt", prompt_to_json(n.prompt)},
                       {"params", params}});
    }
    json edges = json::array();
    for (const auto& [u, v] : a.required_edges) {
      edges.push_back(json::array({u.local, v.local}));
    }
    agents.push_back({{"id", a.agent_id},
                      {"nodes", nodes},
                      {"edges", edges},
                      {"output", a.output_node.local}});
  }
  json mandated = json::array();
  for (const auto& [u, v] : def.mandated_edges) {
    mandated.push_back(json::array({u.str(), v.str()}));
  }
  return {{"agents", agents},
          {"mandated_edges", mandated},
          {"output_agent", def.output_agent}};
}

inline GraphDefinition graph_definition_from_json(const json& j) {
  GraphDefinition def;
  for (const auto& ja : j.at("agents")) {
    AgentGraph a;
    a.agent_id = ja.at("id").get<std::string>();
    for (const auto& jn : ja.at("nodes")) {
      Node n;
      n.id = {a.agent_id, jn.at("id").get<std::string>()};
      n.kind = routine_kind_from_string(jn.value("kind", "llm-query"));
      n.description = jn.value("description", "");
      if (jn.contains("prompt")) n.prompt = prompt_from_json(jn.at("prompt"));
      const json params = jn.value("params", json::object());
      for (const auto& [k, v] : params.items()) {
        n.params[k] = v.get<std::string>();
      }
      a.nodes.push_back(std::move(n));
    }
    for (const auto& je : ja.value("edges", json::array())) {
      a.required_edges.insert({{a.agent_id, je.at(0).get<std::string>()},
                               {a.agent_id, je.at(1).get<std::string>()}});
    }
    a.output_node = {a.agent_id, ja.at("output").get<std::string>()};
    a.validate();
    def.agents.push_back(std::move(a));
  }
  for (const auto& je : j.value("mandated_edges", json::array())) {
    def.mandated_edges.insert({NodeId::parse(je.at(0).get<std::string>()),
                               NodeId::parse(je.at(1).get<std::string>())});
  }
  def.output_agent = j.at("output_agent").get<std::string>();
  return def;
}

// ---------------------------------------------------------------------------
// Agent template files: {"kind", "params"}.
// ---------------------------------------------------------------------------

inline json agent_template_to_json(const AgentTemplate& tpl) {
  json params = json::object();
  for (const auto& [k, v] : tpl.params) params[k] = v;
  return {{"kind", to_string(tpl.kind)}, {"params", params}};
}

inline AgentTemplate agent_template_from_json(const json& j) {
  AgentTemplate tpl;
  tpl.kind = agent_kind_from_string(j.at("kind").get<std::string>());
  const json params = j.value("params", json::object());
  for (const auto& [k, v] : params.items()) {
    tpl.params[k] = v.get<std::string>();
  }
  return tpl;
}

// ---------------------------------------------------------------------------
// Learned-parameter files: {"version", "seed", "edges": [{src, dst, logit,
// prob}]} in canonical edge order.
// ---------------------------------------------------------------------------

inline json parameters_to_json(const EdgeDistribution& dist,
                               std::uint64_t seed) {
  json edges = json::array();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    edges.push_back({{"src", dist.edges[i].first.str()},
                     {"dst", dist.edges[i].second.str()},
                     {"logit", dist.logits[i]},
                     {"prob", dist.prob(i)}});
  }
  return {{"version", 1}, {"seed", seed}, {"edges", edges}};
}

inline EdgeDistribution parameters_from_json(const json& j) {
  if (j.value("version", 0) != 1) {
    throw ConfigError("unsupported parameter file version");
  }
  EdgeDistribution dist;
  for (const auto& je : j.at("edges")) {
    dist.edges.push_back({NodeId::parse(je.at("src").get<std::string>()),
                          NodeId::parse(je.at("dst").get<std::string>())});
    dist.logits.push_back(clamp_logit(je.at("logit").get<double>()));
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Run records: JSON lines, one object per iteration.
// ---------------------------------------------------------------------------

inline void write_run_record(std::ostream& os, const OptRunRecord& record) {
  for (const auto& it : record.iterations) {
    const json j = {{"iter", it.iter},
                    {"mean_utility", it.mean_utility},
                    {"utilities", it.utilities},
                    {"logits", it.logits}};
    os << j.dump() << "\n";
  }
}

inline OptRunRecord read_run_record(std::istream& is) {
  OptRunRecord record;
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const json j = json::parse(line);
    IterationRecord rec;
    rec.iter = j.at("iter").get<int>();
    rec.mean_utility = j.at("mean_utility").get<double>();
    rec.utilities = j.at("utilities").get<std::vector<double>>();
    rec.logits = j.at("logits").get<std::vector<double>>();
    record.iterations.push_back(std::move(rec));
  }
  return record;
}

// ---------------------------------------------------------------------------
// Heatmap CSV: header row/column of node ids, cells per export_matrix.
// ---------------------------------------------------------------------------

inline std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_heatmap(std::ostream& os, const EdgeDistribution& dist,
                          const CompositeGraph& g) {
  const auto matrix = export_matrix(dist, g);
  const std::set<NodeId> id_set = g.node_ids();
  const std::vector<NodeId> ids(id_set.begin(), id_set.end());
  os << "node";
  for (const auto& id : ids) os << "," << id.str();
  os << "\n";
  for (std::size_t r = 0; r < ids.size(); ++r) {
    os << ids[r].str();
    for (std::size_t c = 0; c < ids.size(); ++c) {
      os << "," << format_cell(matrix[r][c]);
    }
    os << "\n";
  }
}

// ---------------------------------------------------------------------------
// History snapshots and prompt state.
// ---------------------------------------------------------------------------

inline json history_to_json(const HistoryStore& store) {
  json out = json::array();
  for (const auto& [id, h] : store.all()) {
    json entries = json::array();
    for (const auto& e : h.entries) {
      json ctx = json::array();
      for (const auto& c : e.context.entries) {
        ctx.push_back({{"producer", c.producer.str()}, {"output", c.output}});
      }
      json entry = {{"problem_id", e.problem_id},
                    {"input", e.input},
                    {"context", ctx},
                    {"output", e.output}};
      if (e.score) entry["score"] = *e.score;
      entries.push_back(std::move(entry));
    }
    out.push_back({{"node_id", id.str()}, {"entries", entries}});
  }
  return out;
}

inline json prompts_to_json(const CompositeGraph& g) {
  json out = json::array();
  for (const auto& node : g.all_nodes()) {
    json demos = json::array();
    for (const auto& d : node->prompt.demos) {
      demos.push_back({{"in", d.input}, {"out", d.output}});
    }
    out.push_back({{"node_id", node->id.str()},
                   {"instruction", node->prompt.instruction},
                   {"demos", demos}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace swarmgraph
