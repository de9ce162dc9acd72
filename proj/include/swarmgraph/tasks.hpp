#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarmgraph/errors.hpp"
#include "swarmgraph/util.hpp"

namespace swarmgraph {

/// One multiple-choice task instance. The gold answer is always one of the
/// options.
struct TaskInstance {
  std::string problem_id;
  std::string question;
  std::vector<std::string> options;
  std::string gold;

  bool operator==(const TaskInstance&) const = default;
};

struct TaskGenParams {
  int count = 0;
  int num_options = 4;
  std::string id_prefix = "task";
};

inline std::string option_letter(std::size_t i) {
  return std::string(1, static_cast<char>('A' + i));
}

namespace detail {
inline const std::vector<std::string>& task_word_pool() {
  static const std::vector<std::string> words = {
      "amber",  "basalt", "cobalt", "dune",   "ember",  "fjord",
      "garnet", "harbor", "indigo", "juniper", "krypton", "lagoon",
      "meadow", "nimbus", "onyx",   "prairie"};
  return words;
}
}  // namespace detail

/// Deterministic synthetic multiple-choice instances: distinct answer words
/// per task with the gold answer uniformly placed among the options.
inline std::vector<TaskInstance> generate_tasks(const TaskGenParams& params,
                                                std::uint64_t seed) {
  if (params.num_options < 2) {
    throw DomainError("tasks need at least two options");
  }
  const auto& pool = detail::task_word_pool();
  if (static_cast<std::size_t>(params.num_options) > pool.size()) {
    throw DomainError("num_options exceeds the answer word pool");
  }
  std::vector<TaskInstance> tasks;
  tasks.reserve(static_cast<std::size_t>(params.count));
  for (int i = 0; i < params.count; ++i) {
    std::mt19937_64 rng(stable_hash(seed, "task-gen", i));
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    for (std::size_t j = idx.size() - 1; j > 0; --j) {
      std::swap(idx[j], idx[next_index(rng, j + 1)]);
    }
    TaskInstance t;
    t.problem_id = params.id_prefix + "-" + std::to_string(i);
    t.options.reserve(static_cast<std::size_t>(params.num_options));
    for (int j = 0; j < params.num_options; ++j) {
      t.options.push_back(pool[idx[static_cast<std::size_t>(j)]]);
    }
    const std::size_t gold_pos =
        next_index(rng, static_cast<std::size_t>(params.num_options));
    t.gold = t.options[gold_pos];
    t.question = "Case " + t.problem_id +
                 ": which option is the designated answer?";
    tasks.push_back(std::move(t));
  }
  return tasks;
}

/// Renders a task into the question template handed to agent nodes.
inline std::string render_question(const TaskInstance& t) {
  std::string out = t.question;
  for (std::size_t i = 0; i < t.options.size(); ++i) {
    out += (i == 0 ? " Option " : ", Option ") + option_letter(i) + ": " +
           t.options[i];
  }
  out += ".";
  return out;
}

/// Position of the gold answer among the options.
inline std::size_t gold_position(const TaskInstance& t) {
  for (std::size_t i = 0; i < t.options.size(); ++i) {
    if (t.options[i] == t.gold) return i;
  }
  throw DomainError("task " + t.problem_id + ": gold answer not in options");
}

}  // namespace swarmgraph
