#include <catch2/catch.hpp>

#include <cmath>
#include <set>

#include "helpers.hpp"

using namespace swarmgraph;

TEST_CASE("task generation is deterministic and well formed") {
  TaskGenParams params;
  params.count = 153;
  const auto a = generate_tasks(params, 42);
  const auto b = generate_tasks(params, 42);
  CHECK(a == b);
  CHECK(a.size() == 153);

  std::set<std::string> ids;
  for (const auto& t : a) {
    CHECK(ids.insert(t.problem_id).second);
    CHECK(t.options.size() == 4);
    CHECK(std::find(t.options.begin(), t.options.end(), t.gold) !=
          t.options.end());
    std::set<std::string> distinct(t.options.begin(), t.options.end());
    CHECK(distinct.size() == t.options.size());
  }

  const auto c = generate_tasks(params, 43);
  CHECK(a != c);
}

TEST_CASE("invalid option counts are rejected") {
  TaskGenParams params;
  params.count = 1;
  params.num_options = 1;
  CHECK_THROWS_AS(generate_tasks(params, 1), DomainError);
}

TEST_CASE("gold position is uniform (chi-squared, alpha = 0.01)") {
  TaskGenParams params;
  params.count = 10000;
  const auto tasks = generate_tasks(params, 7);
  std::vector<int> counts(4, 0);
  for (const auto& t : tasks) ++counts[gold_position(t)];
  const double expected = params.count / 4.0;
  double chi2 = 0.0;
  for (const int c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  // Critical value for 3 degrees of freedom at the 1% level.
  CHECK(chi2 < 11.345);
}
