#include <catch2/catch.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace swarmgraph;
using sgtest::nid;
using sgtest::tiny_agent;

namespace {

/// Composite with truthful and adversarial one-node agents feeding a decision
/// agent, candidate edges restricted to the two vote wires.
CompositeGraph vote_toy() {
  CompositeGraph g;
  g.agents = {tiny_agent("adv"), tiny_agent("tru"), tiny_agent("dec")};
  g.output_node = nid("dec");
  g.potential_edges = {{nid("adv"), nid("dec")}, {nid("tru"), nid("dec")}};
  g.validate();
  return g;
}

/// Deterministic utility of the vote toy: 1 iff the truthful wire is in.
double vote_utility(const std::vector<std::uint8_t>& mask) {
  return mask[1] ? 1.0 : 0.0;
}

}  // namespace

TEST_CASE("adam_step implements bias-corrected ascent") {
  SECTION("zero gradient leaves parameters unchanged") {
    AdamState st = make_adam_state(3);
    std::vector<double> params{1.0, -2.0, 0.5};
    const std::vector<double> before = params;
    adam_step(st, params, {0.0, 0.0, 0.0}, 0.1);
    CHECK(params == before);
  }
  SECTION("first unit-gradient step moves by ~learning rate") {
    AdamState st = make_adam_state(1);
    std::vector<double> params{0.0};
    adam_step(st, params, {1.0}, 0.1);
    // Hand evaluation: m_hat = 1, v_hat = 1, step = 0.1 / (1 + 1e-8).
    CHECK(params[0] == Approx(0.1 * 1.0 / (1.0 + 1e-8)).epsilon(1e-12));
  }
  SECTION("constant gradient moves monotonically") {
    AdamState st = make_adam_state(1);
    std::vector<double> params{0.0};
    double prev = 0.0;
    for (int t = 0; t < 10; ++t) {
      adam_step(st, params, {-0.5}, 0.05);
      CHECK(params[0] < prev);
      prev = params[0];
    }
  }
  SECTION("trajectory matches the closed form for a constant gradient") {
    // For constant g: m_t = g(1-b1^t), v_t = g^2(1-b2^t), so every
    // bias-corrected step equals lr * g / (|g| + eps).
    const double g = 1.0;
    const double lr = 0.1;
    AdamState st = make_adam_state(1);
    std::vector<double> params{0.0};
    for (int t = 1; t <= 5; ++t) {
      adam_step(st, params, {g}, lr);
      const double expected = t * lr * g / (std::abs(g) + 1e-8);
      CHECK(params[0] == Approx(expected).epsilon(1e-12));
    }
  }
  SECTION("shape mismatch raises") {
    AdamState st = make_adam_state(2);
    std::vector<double> params{0.0, 0.0};
    CHECK_THROWS_AS(adam_step(st, params, {1.0}, 0.1), ShapeMismatch);
  }
}

TEST_CASE("estimate_gradient centers rewards against the baseline") {
  const CompositeGraph g = vote_toy();
  const EdgeDistribution d = new_distribution(g, 0.5);
  std::mt19937_64 rng(5);
  std::vector<GraphSample> samples;
  for (int i = 0; i < 4; ++i) samples.push_back(sample(d, g, rng));

  SECTION("utilities equal to the baseline give a zero vector") {
    const std::vector<double> utilities(4, 0.7);
    const auto grad = estimate_gradient(d, g, samples, utilities, 0.7);
    for (const double x : grad) CHECK(x == 0.0);
  }
  SECTION("single unit-utility sample returns its score function") {
    const auto grad = estimate_gradient(d, g, {samples[0]}, {1.0}, 0.0);
    CHECK(grad == grad_log_prob(d, samples[0], g));
  }
  SECTION("shifting utilities and baseline together changes nothing") {
    // Dyadic values keep the subtraction exact in floating point.
    const std::vector<double> utilities{0.25, 0.75, 0.5, 1.0};
    std::vector<double> shifted = utilities;
    for (double& u : shifted) u += 2.0;
    CHECK(estimate_gradient(d, g, samples, utilities, 0.125) ==
          estimate_gradient(d, g, samples, shifted, 2.125));
  }
  SECTION("length mismatch raises") {
    CHECK_THROWS_AS(estimate_gradient(d, g, samples, {1.0}, 0.0),
                    LengthMismatch);
    CHECK_THROWS_AS(estimate_gradient(d, g, {}, {}, 0.0), LengthMismatch);
  }
}

TEST_CASE("score-function estimator is unbiased on the vote toy") {
  const CompositeGraph g = vote_toy();
  const EdgeDistribution d = new_distribution(g, 0.5);

  // Exact expectation and gradient from the enumeration oracle: the utility
  // is the truthful-wire indicator, so E[u] = 1/2 and the exact gradient is
  // (0, p(1-p)) = (0, 0.25) with respect to the logits.
  double exact_value = 0.0;
  std::vector<double> exact_grad(d.size(), 0.0);
  for (const auto& m : sgtest::oracle_enumerate_masks(g, d.probs())) {
    exact_value += m.probability * vote_utility(m.included);
    for (std::size_t j = 0; j < d.size(); ++j) {
      const double factor = m.included[j] ? 1.0 - d.prob(j) : -d.prob(j);
      exact_grad[j] += m.probability * vote_utility(m.included) * factor;
    }
  }
  CHECK(exact_value == Approx(0.5).epsilon(1e-12));
  CHECK(exact_grad[0] == Approx(0.0).margin(1e-12));
  CHECK(exact_grad[1] == Approx(0.25).epsilon(1e-12));

  const int n = 10000;
  std::vector<double> mean(d.size(), 0.0);
  std::vector<double> sq(d.size(), 0.0);
  std::mt19937_64 rng(12345);
  for (int i = 0; i < n; ++i) {
    const GraphSample s = sample(d, g, rng);
    const auto est =
        estimate_gradient(d, g, {s}, {vote_utility(s.included)}, 0.0);
    for (std::size_t j = 0; j < d.size(); ++j) {
      mean[j] += est[j];
      sq[j] += est[j] * est[j];
    }
  }
  for (std::size_t j = 0; j < d.size(); ++j) {
    mean[j] /= n;
    const double var = sq[j] / n - mean[j] * mean[j];
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean[j] - exact_grad[j]) <= 3 * se + 1e-12);
  }
}

TEST_CASE("optimize_edges is reproducible and respects its config") {
  const CompositeGraph g = vote_toy();
  const UtilityEstimator estimator = [](const CompositeGraph& realized,
                                        std::mt19937_64&) {
    // Reward any realization that kept the truthful wire.
    return realized.node_ids().count(nid("tru")) ? 1.0 : 0.0;
  };

  SECTION("zero iterations return the initial distribution") {
    EdgeOptConfig cfg;
    cfg.iterations = 0;
    cfg.init_prob = 0.3;
    const auto [dist, record] = optimize_edges(g, estimator, cfg);
    CHECK(record.iterations.empty());
    for (std::size_t i = 0; i < dist.size(); ++i) {
      CHECK(dist.prob(i) == Approx(0.3).epsilon(1e-12));
    }
  }
  SECTION("identical config and seed reproduce the run history") {
    EdgeOptConfig cfg;
    cfg.iterations = 25;
    cfg.samples_per_iter = 4;
    cfg.seed = 77;
    const auto [d1, r1] = optimize_edges(g, estimator, cfg);
    const auto [d2, r2] = optimize_edges(g, estimator, cfg);
    CHECK(d1.logits == d2.logits);
    REQUIRE(r1.iterations.size() == r2.iterations.size());
    for (std::size_t i = 0; i < r1.iterations.size(); ++i) {
      CHECK(r1.iterations[i].utilities == r2.iterations[i].utilities);
      CHECK(r1.iterations[i].logits == r2.iterations[i].logits);
    }
  }
  SECTION("the truthful wire is reinforced over the adversarial one") {
    EdgeOptConfig cfg;
    cfg.iterations = 120;
    cfg.samples_per_iter = 4;
    cfg.learning_rate = 0.1;
    cfg.seed = 3;
    const auto [dist, record] = optimize_edges(g, estimator, cfg);
    REQUIRE(record.iterations.size() == 120);
    CHECK(dist.prob(1) > 0.9);   // tru -> dec
    CHECK(dist.prob(1) > dist.prob(0));
  }
  SECTION("vanilla ascent works without Adam") {
    EdgeOptConfig cfg;
    cfg.iterations = 200;
    cfg.learning_rate = 0.4;
    cfg.use_adam = false;
    cfg.seed = 9;
    const auto [dist, record] = optimize_edges(g, estimator, cfg);
    CHECK(dist.prob(1) > dist.prob(0));
  }
  SECTION("estimator failures carry iteration and sample indices") {
    const UtilityEstimator broken = [](const CompositeGraph&,
                                       std::mt19937_64&) -> double {
      throw std::runtime_error("scoring backend unavailable");
    };
    EdgeOptConfig cfg;
    cfg.iterations = 1;
    try {
      optimize_edges(g, broken, cfg);
      FAIL("expected OptimizationError");
    } catch (const OptimizationError& e) {
      CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
      CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
    }
  }
  SECTION("utility sees the pruned realization") {
    std::vector<std::size_t> observed;
    const UtilityEstimator spy = [&](const CompositeGraph& realized,
                                     std::mt19937_64&) {
      observed.push_back(realized.node_count());
      return 0.0;
    };
    EdgeOptConfig cfg;
    cfg.iterations = 2;
    cfg.samples_per_iter = 3;
    cfg.init_prob = 0.5;
    cfg.seed = 4;
    optimize_edges(g, spy, cfg);
    for (const std::size_t n : observed) {
      CHECK(n >= 1);   // at least the decision agent
      CHECK(n <= 3);   // never more than the full toy
    }
  }
  SECTION("sparse-init profile: init 0.1, lr 0.4, 20 samples, baseline 0.4") {
    EdgeOptConfig cfg;
    cfg.iterations = 10;
    cfg.samples_per_iter = 20;
    cfg.learning_rate = 0.4;
    cfg.baseline = 0.4;
    cfg.init_prob = 0.1;
    cfg.seed = 13;
    const auto [dist, record] = optimize_edges(g, estimator, cfg);
    REQUIRE(record.iterations.size() == 10);
    CHECK(record.iterations[0].utilities.size() == 20);
    for (const auto& it : record.iterations) {
      CHECK(it.mean_utility >= 0.0);
      CHECK(it.mean_utility <= 1.0);
    }
    // The first snapshot is one Adam step away from logit(0.1).
    for (const double l : record.iterations[0].logits) {
      CHECK(std::abs(l - logit(0.1)) <= 0.4 + 1e-9);
    }
  }
  SECTION("resume continues from a parameter snapshot") {
    EdgeOptConfig cfg;
    cfg.iterations = 10;
    cfg.seed = 31;
    auto [dist, record] = optimize_edges(g, estimator, cfg);
    EdgeOptConfig more = cfg;
    more.iterations = 1;
    const auto [resumed, rec2] =
        optimize_edges(g, estimator, more, dist);
    REQUIRE(rec2.iterations.size() == 1);
    CHECK(resumed.edges == dist.edges);
  }
}
