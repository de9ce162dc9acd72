#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "swarmgraph/graph.hpp"

namespace swarmgraph {

/// Parameterized distribution over completions of a composite graph: one
/// unconstrained logit per potential edge, giving inclusion probability
/// sigmoid(logit). The edge order is the composite's canonical order and is
/// load-bearing: the sequential sampler resolves cycle conflicts in favor of
/// earlier edges.
struct EdgeDistribution {
  std::vector<Edge> edges;
  std::vector<double> logits;

  std::size_t size() const { return edges.size(); }

  double prob(std::size_t i) const { return sigmoid(logits[i]); }

  std::vector<double> probs() const {
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = prob(i);
    return out;
  }
};

/// One draw from the distribution. `eligible[i]` is false where inclusion was
/// impossible at edge i's turn (it would have closed a cycle); such edges are
/// excluded with probability one and contribute no likelihood factor.
struct GraphSample {
  std::vector<std::uint8_t> included;
  std::vector<std::uint8_t> eligible;
  double log_prob = 0.0;
};

inline EdgeDistribution new_distribution(const CompositeGraph& g,
                                         double init_prob) {
  if (!(init_prob > 0.0 && init_prob < 1.0)) {
    throw DomainError("initial edge probability must lie in (0, 1)");
  }
  EdgeDistribution dist;
  dist.edges = g.potential_edges;
  dist.logits.assign(dist.edges.size(), clamp_logit(logit(init_prob)));
  return dist;
}

namespace detail {

/// Incremental cycle oracle over the composite's required graph: edges are
/// admitted one by one in sampling order.
class EligibilityReplay {
 public:
  explicit EligibilityReplay(const CompositeGraph& g) {
    for (const NodeId& id : g.node_ids()) {
      index_.emplace(id, adj_.size());
      adj_.emplace_back();
    }
    for (const auto& [u, v] : g.required_edges) {
      adj_[index_.at(u)].push_back(index_.at(v));
    }
  }

  /// True iff adding the edge to the current graph would create a cycle.
  bool would_cycle(const Edge& e) const {
    return reaches(index_.at(e.second), index_.at(e.first));
  }

  void add(const Edge& e) {
    adj_[index_.at(e.first)].push_back(index_.at(e.second));
  }

 private:
  bool reaches(std::size_t from, std::size_t to) const {
    if (from == to) return true;
    std::vector<std::uint8_t> seen(adj_.size(), 0);
    std::vector<std::size_t> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      const std::size_t n = stack.back();
      stack.pop_back();
      for (const std::size_t s : adj_[n]) {
        if (s == to) return true;
        if (!seen[s]) {
          seen[s] = 1;
          stack.push_back(s);
        }
      }
    }
    return false;
  }

  std::map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> adj_;
};

inline void check_alignment(const EdgeDistribution& dist,
                            const CompositeGraph& g) {
  if (dist.edges != g.potential_edges) {
    throw DomainError(
        "edge distribution does not match the composite's potential edges");
  }
}

}  // namespace detail

/// Draws one graph: walks the potential edges in order, force-excluding any
/// edge that would close a cycle and including the rest independently with
/// probability sigmoid(logit). Deterministic given the generator state.
inline GraphSample sample(const EdgeDistribution& dist,
                          const CompositeGraph& g, std::mt19937_64& rng) {
  detail::check_alignment(dist, g);
  detail::EligibilityReplay replay(g);
  GraphSample s;
  s.included.assign(dist.size(), 0);
  s.eligible.assign(dist.size(), 0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (replay.would_cycle(dist.edges[i])) continue;
    s.eligible[i] = 1;
    const double p = dist.prob(i);
    if (next_unit(rng) < p) {
      s.included[i] = 1;
      s.log_prob += std::log(p);
      replay.add(dist.edges[i]);
    } else {
      s.log_prob += std::log(1.0 - p);
    }
  }
  return s;
}

/// Exact log-likelihood of an inclusion mask, recomputed by replaying the
/// sequential sampler's eligibility decisions.
inline double log_prob(const EdgeDistribution& dist,
                       const std::vector<std::uint8_t>& mask,
                       const CompositeGraph& g) {
  detail::check_alignment(dist, g);
  if (mask.size() != dist.size()) {
    throw LengthMismatch("mask length does not match edge count");
  }
  detail::EligibilityReplay replay(g);
  double lp = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (replay.would_cycle(dist.edges[i])) {
      if (mask[i]) {
        throw InfeasibleSample("mask includes cycle-forced edge " +
                               edge_str(dist.edges[i]));
      }
      continue;
    }
    const double p = dist.prob(i);
    if (mask[i]) {
      lp += std::log(p);
      replay.add(dist.edges[i]);
    } else {
      lp += std::log(1.0 - p);
    }
  }
  return lp;
}

/// Gradient of log_prob with respect to the logits: (1 - p) for eligible
/// included edges, -p for eligible excluded edges, 0 for ineligible ones.
inline std::vector<double> grad_log_prob(const EdgeDistribution& dist,
                                         const std::vector<std::uint8_t>& mask,
                                         const CompositeGraph& g) {
  detail::check_alignment(dist, g);
  if (mask.size() != dist.size()) {
    throw LengthMismatch("mask length does not match edge count");
  }
  detail::EligibilityReplay replay(g);
  std::vector<double> grad(dist.size(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (replay.would_cycle(dist.edges[i])) {
      if (mask[i]) {
        throw InfeasibleSample("mask includes cycle-forced edge " +
                               edge_str(dist.edges[i]));
      }
      continue;
    }
    const double p = dist.prob(i);
    if (mask[i]) {
      grad[i] = 1.0 - p;
      replay.add(dist.edges[i]);
    } else {
      grad[i] = -p;
    }
  }
  return grad;
}

inline std::vector<double> grad_log_prob(const EdgeDistribution& dist,
                                         const GraphSample& s,
                                         const CompositeGraph& g) {
  return grad_log_prob(dist, s.included, g);
}

/// Edge set selected by a mask, in canonical order.
inline std::set<Edge> edges_from_mask(const EdgeDistribution& dist,
                                      const std::vector<std::uint8_t>& mask) {
  if (mask.size() != dist.size()) {
    throw LengthMismatch("mask length does not match edge count");
  }
  std::set<Edge> out;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (mask[i]) out.insert(dist.edges[i]);
  }
  return out;
}

/// Deterministic mode-style realization: replay the edges in order and keep
/// each edge that is still eligible and whose probability is >= threshold.
inline std::set<Edge> realize(const EdgeDistribution& dist,
                              const CompositeGraph& g, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw DomainError("realize threshold must lie in [0, 1]");
  }
  detail::check_alignment(dist, g);
  detail::EligibilityReplay replay(g);
  std::set<Edge> out;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (replay.would_cycle(dist.edges[i])) continue;
    if (dist.prob(i) >= threshold) {
      out.insert(dist.edges[i]);
      replay.add(dist.edges[i]);
    }
  }
  return out;
}

/// The "full graph": every potential edge that stays acyclic when the edges
/// are admitted sequentially in canonical order.
inline std::set<Edge> full_realization(const CompositeGraph& g) {
  detail::EligibilityReplay replay(g);
  std::set<Edge> out;
  for (const Edge& e : g.potential_edges) {
    if (replay.would_cycle(e)) continue;
    out.insert(e);
    replay.add(e);
  }
  return out;
}

/// Adjacency-style matrix over all composite nodes in canonical order:
/// potential edges carry their current probability, required edges 1, all
/// other cells 0.
inline std::vector<std::vector<double>> export_matrix(
    const EdgeDistribution& dist, const CompositeGraph& g) {
  detail::check_alignment(dist, g);
  const std::set<NodeId> id_set = g.node_ids();
  const std::vector<NodeId> ids(id_set.begin(), id_set.end());
  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  std::vector<std::vector<double>> m(ids.size(),
                                     std::vector<double>(ids.size(), 0.0));
  for (const auto& [u, v] : g.required_edges) {
    m[index.at(u)][index.at(v)] = 1.0;
  }
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& [u, v] = dist.edges[i];
    m[index.at(u)][index.at(v)] = dist.prob(i);
  }
  return m;
}

/// Diagnostic: mean number of included edges over seeded samples. Counts
/// realized inclusions only; cycle-forced exclusions do not contribute.
inline double expected_edge_count(const EdgeDistribution& dist,
                                  const CompositeGraph& g, int num_samples,
                                  std::mt19937_64& rng) {
  if (num_samples <= 0) throw DomainError("num_samples must be positive");
  double total = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    const GraphSample gs = sample(dist, g, rng);
    for (const auto b : gs.included) total += b;
  }
  return total / num_samples;
}

}  // namespace swarmgraph
