#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "swarmgraph/edge_distribution.hpp"
#include "swarmgraph/graph.hpp"

namespace swarmgraph {

/// First/second moment accumulators for Adam.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline AdamState make_adam_state(std::size_t n) {
  AdamState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

/// One bias-corrected Adam ascent step: params += lr * m_hat / (sqrt(v_hat) + eps).
inline void adam_step(AdamState& state, std::vector<double>& params,
                      const std::vector<double>& grad, double learning_rate) {
  if (state.m.size() != params.size() || grad.size() != params.size()) {
    throw ShapeMismatch("adam_step: parameter/gradient/state sizes differ");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] += learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

/// Score-function gradient estimate: (1/M) * sum_i (u_i - baseline) *
/// grad_log_prob(sample_i). Subtracting a constant baseline leaves the
/// estimator unbiased.
inline std::vector<double> estimate_gradient(
    const EdgeDistribution& dist, const CompositeGraph& g,
    const std::vector<GraphSample>& samples,
    const std::vector<double>& utilities, double baseline) {
  if (samples.size() != utilities.size()) {
    throw LengthMismatch("estimate_gradient: samples and utilities differ");
  }
  if (samples.empty()) {
    throw LengthMismatch("estimate_gradient: need at least one sample");
  }
  std::vector<double> acc(dist.size(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::vector<double> glp = grad_log_prob(dist, samples[i], g);
    const double w = utilities[i] - baseline;
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * glp[j];
  }
  const double scale = 1.0 / static_cast<double>(samples.size());
  for (double& x : acc) x *= scale;
  return acc;
}

/// Task-specific utility: an unbiased per-call estimate evaluated on the
/// pruned realized graph. The generator is the call's private random stream.
using UtilityEstimator =
    std::function<double(const CompositeGraph& realized, std::mt19937_64& rng)>;

struct EdgeOptConfig {
  int iterations = 200;
  int samples_per_iter = 4;
  double learning_rate = 0.1;
  double baseline = 0.0;
  double init_prob = 0.5;
  double realize_threshold = 0.5;
  bool use_adam = true;
  std::uint64_t seed = 0;
};

struct IterationRecord {
  int iter = 0;
  double mean_utility = 0.0;
  std::vector<double> utilities;
  std::vector<double> logits;
};

/// Per-iteration history of one optimization run; logit snapshots are taken
/// after each update.
struct OptRunRecord {
  std::vector<IterationRecord> iterations;
};

/// REINFORCE edge optimization. Each iteration draws samples_per_iter graphs,
/// scores each pruned realization with the estimator, updates the logits with
/// a baseline-adjusted score-function gradient, and records the step. Every
/// random stream derives from (seed, iteration, sample), so runs are
/// reproducible and samples may be evaluated in any order.
inline std::pair<EdgeDistribution, OptRunRecord> optimize_edges(
    const CompositeGraph& g, const UtilityEstimator& estimator,
    const EdgeOptConfig& cfg,
    std::optional<EdgeDistribution> start = std::nullopt) {
  if (cfg.samples_per_iter < 1) {
    throw DomainError("samples_per_iter must be at least 1");
  }
  if (cfg.iterations < 0) throw DomainError("iterations must be >= 0");
  if (!(cfg.learning_rate > 0.0)) {
    throw DomainError("learning rate must be positive");
  }
  EdgeDistribution dist =
      start ? std::move(*start) : new_distribution(g, cfg.init_prob);
  detail::check_alignment(dist, g);

  AdamState adam = make_adam_state(dist.size());
  OptRunRecord record;
  record.iterations.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    std::vector<GraphSample> samples;
    std::vector<double> utilities;
    samples.reserve(static_cast<std::size_t>(cfg.samples_per_iter));
    for (int i = 0; i < cfg.samples_per_iter; ++i) {
      std::mt19937_64 sample_rng(
          stable_hash(cfg.seed, "edge-opt-sample", iter, i));
      GraphSample s = sample(dist, g, sample_rng);
      const CompositeGraph realized =
          prune(g, edges_from_mask(dist, s.included));
      std::mt19937_64 utility_rng(
          stable_hash(cfg.seed, "edge-opt-utility", iter, i));
      double u = 0.0;
      try {
        u = estimator(realized, utility_rng);
      } catch (const std::exception& e) {
        throw OptimizationError("utility estimation failed at iteration " +
                                std::to_string(iter) + ", sample " +
                                std::to_string(i) + ": " + e.what());
      }
      samples.push_back(std::move(s));
      utilities.push_back(u);
    }

    const std::vector<double> grad =
        estimate_gradient(dist, g, samples, utilities, cfg.baseline);
    if (cfg.use_adam) {
      adam_step(adam, dist.logits, grad, cfg.learning_rate);
    } else {
      for (std::size_t j = 0; j < dist.logits.size(); ++j) {
        dist.logits[j] += cfg.learning_rate * grad[j];
      }
    }
    for (double& l : dist.logits) l = clamp_logit(l);

    IterationRecord rec;
    rec.iter = iter;
    double mean = 0.0;
    for (const double u : utilities) mean += u;
    rec.mean_utility = utilities.empty() ? 0.0 : mean / utilities.size();
    rec.utilities = std::move(utilities);
    rec.logits = dist.logits;
    record.iterations.push_back(std::move(rec));
  }
  return {std::move(dist), std::move(record)};
}

}  // namespace swarmgraph
