// Command-line front end for building, running, and optimizing agent swarms.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmgraph/httplib_transport.hpp"
#include "swarmgraph/swarmgraph.hpp"

namespace sg = swarmgraph;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
  std::string executor = "mock";
  std::uint64_t seed = 1;
  bool seed_set = false;
};

sg::json require_json(const std::string& path) {
  if (!fs::exists(path)) {
    throw sg::ConfigError("file not found: " + path);
  }
  return sg::load_json_file(path);
}

std::unique_ptr<sg::Executor> make_executor(
    const GlobalOpts& opts, const sg::json& config,
    const std::vector<sg::TaskInstance>& tasks) {
  if (opts.executor == "mock") {
    sg::MockPolicy policy;
    const sg::json mock = config.value("mock", sg::json::object());
    policy.truthful_accuracy = mock.value("p_truthful", 0.85);
    policy.adversarial_accuracy = mock.value("p_adversarial", 0.0);
    policy.seed = opts.seed;
    return std::make_unique<sg::MockExecutor>(policy, tasks);
  }
  if (opts.executor == "http") {
    sg::HttpExecutorConfig http;
    const sg::json hc = config.value("http", sg::json::object());
    http.base_url = hc.value("base_url", http.base_url);
    http.model = hc.value("model", http.model);
    http.temperature = hc.value("temperature", http.temperature);
    http.api_key_env = hc.value("api_key_env", http.api_key_env);
    http.max_attempts = hc.value("max_attempts", http.max_attempts);
    http.backoff_ms = hc.value("backoff_ms", http.backoff_ms);
    http.cache_dir = hc.value("cache_dir", http.cache_dir);
    http.max_in_flight = hc.value("max_in_flight", http.max_in_flight);
    return std::make_unique<sg::HttpExecutor>(
        http, sg::make_httplib_transport(http.base_url));
  }
  throw sg::ConfigError("unknown executor '" + opts.executor +
                        "' (expected mock or http)");
}

std::vector<sg::TaskInstance> tasks_from_config(const sg::json& config,
                                                std::uint64_t seed,
                                                const std::string& prefix,
                                                int fallback_count) {
  const sg::json tc = config.value("tasks", sg::json::object());
  sg::TaskGenParams params;
  params.num_options = tc.value("num_options", 4);
  params.count = tc.value("count", fallback_count);
  params.id_prefix = prefix;
  return sg::generate_tasks(params, seed);
}

int cmd_run(const GlobalOpts& opts, const std::string& graph_path,
            const std::string& question, const std::string& gold,
            const std::vector<std::string>& options, bool show_trace) {
  const sg::GraphDefinition def =
      sg::graph_definition_from_json(require_json(graph_path));
  const sg::CompositeGraph graph = def.to_composite();

  std::vector<sg::TaskInstance> tasks;
  std::string problem_id;
  if (!gold.empty()) {
    sg::TaskInstance t;
    t.problem_id = "cli-question";
    t.question = question;
    t.options = options.empty() ? std::vector<std::string>{gold} : options;
    if (std::find(t.options.begin(), t.options.end(), gold) ==
        t.options.end()) {
      throw sg::ConfigError("--gold must be one of --options");
    }
    t.gold = gold;
    tasks.push_back(t);
    problem_id = t.problem_id;
  }
  const auto executor = make_executor(opts, sg::json::object(), tasks);
  const sg::ExecutionTrace trace =
      sg::execute(graph, question, *executor, problem_id);
  if (show_trace) {
    for (const auto& r : trace.records) {
      std::cout << r.node.str() << " -> " << r.output << "\n";
    }
  }
  std::cout << trace.final_output << "\n";
  return 0;
}

int cmd_optimize_edges(const GlobalOpts& opts, const std::string& graph_path,
                       const std::string& config_path,
                       const std::string& out_dir,
                       const std::string& resume_path) {
  const sg::json config = require_json(config_path);
  const sg::GraphDefinition def =
      sg::graph_definition_from_json(require_json(graph_path));
  const sg::CompositeGraph graph = def.to_composite();

  sg::ExperimentConfig exp = sg::experiment_config_from_json(config);
  if (opts.seed_set) exp.seed = opts.seed;
  sg::EdgeOptConfig opt_cfg = exp.edge_opt;
  opt_cfg.seed = sg::stable_hash(exp.seed, "edge-opt");

  const auto tasks =
      tasks_from_config(config, exp.seed, "opt", exp.tasks.opt_pool);
  const auto executor = make_executor(opts, config, tasks);

  const sg::UtilityEstimator estimator = [&](const sg::CompositeGraph& g,
                                             std::mt19937_64& rng) {
    const std::vector<sg::TaskInstance> one{
        tasks[sg::next_index(rng, tasks.size())]};
    return sg::accuracy_utility(g, one, *executor, rng);
  };

  std::optional<sg::EdgeDistribution> start;
  if (!resume_path.empty()) {
    auto resumed = sg::parameters_from_json(require_json(resume_path));
    if (resumed.edges != graph.potential_edges) {
      throw sg::ConfigError(
          "parameter file does not match the graph's potential edges");
    }
    start = std::move(resumed);
  }

  auto [dist, record] = sg::optimize_edges(graph, estimator, opt_cfg, start);

  fs::create_directories(out_dir);
  sg::write_json_file(fs::path(out_dir) / "params.json",
                      sg::parameters_to_json(dist, exp.seed));
  {
    std::ostringstream os;
    sg::write_run_record(os, record);
    sg::write_text_file(fs::path(out_dir) / "run_record.jsonl", os.str());
  }
  {
    std::ostringstream os;
    sg::write_heatmap(os, dist, graph);
    sg::write_text_file(fs::path(out_dir) / "heatmap.csv", os.str());
  }
  std::cout << "wrote " << (fs::path(out_dir) / "params.json").string() << "\n";
  return 0;
}

int cmd_optimize_nodes(const GlobalOpts& opts, const std::string& graph_path,
                       const std::string& config_path,
                       const std::string& out_dir) {
  const sg::json config = require_json(config_path);
  const sg::GraphDefinition def =
      sg::graph_definition_from_json(require_json(graph_path));
  const sg::CompositeGraph graph = def.to_composite();

  std::uint64_t seed = config.value("seed", std::uint64_t{1});
  if (opts.seed_set) seed = opts.seed;

  const sg::json nc = config.value("node_opt", sg::json::object());
  sg::NodeOptConfig cfg;
  cfg.update_every = nc.value("update_every", 4);
  cfg.max_demos = nc.value("max_demos", 4);
  cfg.replay_window = nc.value("replay_window", 10);
  cfg.ucb_iterations = nc.value("ucb_iterations", 100);
  cfg.history_cap = nc.value("history_cap", std::size_t{1000});
  cfg.seed = seed;
  const int num_problems = nc.value("problems", 16);
  const std::string improver_name = nc.value("improver", "greedy");

  const auto tasks = tasks_from_config(config, seed, "nodeopt", num_problems);
  const auto executor = make_executor(opts, config, tasks);

  std::map<std::string, sg::TaskInstance> by_id;
  for (const auto& t : tasks) by_id[t.problem_id] = t;
  const sg::ReplayScorer scorer = sg::make_executor_replay_scorer(
      graph, *executor, [&](const std::string& output,
                            const std::string& problem_id) {
        const auto it = by_id.find(problem_id);
        if (it == by_id.end()) return 0.0;
        return sg::canonical_answer(output) ==
                       sg::canonical_answer(it->second.gold)
                   ? 1.0
                   : 0.0;
      });
  const sg::Improver improver =
      improver_name == "ucb1" ? sg::make_ucb1_improver(scorer, cfg)
                              : sg::make_greedy_improver(scorer, cfg);

  const sg::TaskSampler sampler = [&](std::mt19937_64& rng) {
    return tasks[sg::next_index(rng, tasks.size())];
  };
  const sg::NodeOptResult result = sg::optimize_nodes(
      graph, sampler, *executor, improver, cfg, num_problems);

  fs::create_directories(out_dir);
  sg::write_json_file(fs::path(out_dir) / "prompts.json",
                      sg::prompts_to_json(result.graph));
  sg::write_json_file(fs::path(out_dir) / "history.json",
                      sg::history_to_json(result.history));
  std::cout << "wrote " << (fs::path(out_dir) / "prompts.json").string()
            << "\n";
  return 0;
}

int cmd_eval(const GlobalOpts& opts, const std::string& graph_path,
             const std::string& config_path, const std::string& params_path,
             const std::string& out_dir) {
  const sg::json config = require_json(config_path);
  const sg::GraphDefinition def =
      sg::graph_definition_from_json(require_json(graph_path));
  const sg::CompositeGraph graph = def.to_composite();

  std::uint64_t seed = config.value("seed", std::uint64_t{1});
  if (opts.seed_set) seed = opts.seed;

  const sg::json tc = config.value("tasks", sg::json::object());
  sg::TaskGenParams params;
  params.num_options = tc.value("num_options", 4);
  params.count = tc.value("eval_size", 153);
  params.id_prefix = "eval";
  const auto tasks = sg::generate_tasks(params, sg::stable_hash(seed, "eval"));
  const auto executor = make_executor(opts, config, tasks);

  sg::CompositeGraph target = graph;
  if (!params_path.empty()) {
    const auto dist = sg::parameters_from_json(require_json(params_path));
    if (dist.edges != graph.potential_edges) {
      throw sg::ConfigError(
          "parameter file does not match the graph's potential edges");
    }
    const double threshold = config.value("edge_opt", sg::json::object())
                                 .value("realize_threshold", 0.5);
    target = sg::prune(graph, sg::realize(dist, graph, threshold));
  } else {
    target = sg::prune(graph, {});
  }

  std::mt19937_64 rng(seed);
  const double accuracy =
      sg::accuracy_utility(target, tasks, *executor, rng);
  const sg::json out = {{"seed", seed},
                        {"eval_size", params.count},
                        {"accuracy", accuracy}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    sg::write_json_file(fs::path(out_dir) / "eval.json", out);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_export_heatmap(const std::string& params_path,
                       const std::string& graph_path,
                       const std::string& out_path) {
  const sg::EdgeDistribution dist =
      sg::parameters_from_json(require_json(params_path));

  sg::CompositeGraph graph;
  if (!graph_path.empty()) {
    graph = sg::graph_definition_from_json(require_json(graph_path))
                .to_composite();
    if (dist.edges != graph.potential_edges) {
      throw sg::ConfigError(
          "parameter file does not match the graph's potential edges");
    }
    std::ostringstream os;
    sg::write_heatmap(os, dist, graph);
    sg::write_text_file(out_path, os.str());
    return 0;
  }

  // Without a graph file the matrix covers the nodes named in the parameter
  // file; required-edge cells are unknown and left at zero.
  std::set<sg::NodeId> ids;
  for (const auto& [u, v] : dist.edges) {
    ids.insert(u);
    ids.insert(v);
  }
  std::map<sg::NodeId, std::size_t> index;
  std::vector<sg::NodeId> ordered(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ordered.size(); ++i) index[ordered[i]] = i;
  std::vector<std::vector<double>> m(ordered.size(),
                                     std::vector<double>(ordered.size(), 0.0));
  for (std::size_t i = 0; i < dist.size(); ++i) {
    m[index.at(dist.edges[i].first)][index.at(dist.edges[i].second)] =
        dist.prob(i);
  }
  std::ostringstream os;
  os << "node";
  for (const auto& id : ordered) os << "," << id.str();
  os << "\n";
  for (std::size_t r = 0; r < ordered.size(); ++r) {
    os << ordered[r].str();
    for (std::size_t c = 0; c < ordered.size(); ++c) {
      os << "," << sg::format_cell(m[r][c]);
    }
    os << "\n";
  }
  sg::write_text_file(out_path, os.str());
  return 0;
}

int cmd_adversarial_exp(const GlobalOpts& opts, const std::string& config_path,
                        const std::string& out_dir) {
  if (opts.executor != "mock") {
    throw sg::ConfigError(
        "adversarial-exp runs with the mock executor only; no network access "
        "is performed in mock mode");
  }
  sg::ExperimentConfig cfg =
      sg::experiment_config_from_json(require_json(config_path));
  if (opts.seed_set) cfg.seed = opts.seed;

  const auto [report, opt] = sg::run_adversarial_experiment_detailed(cfg);
  const sg::CompositeGraph swarm = sg::build_adversarial_swarm(cfg.swarm);
  sg::write_report_files(report, opt.first, swarm, opt.second, out_dir);

  std::cout << "potential edges: " << report.potential_edge_count << "\n"
            << "baseline:        " << report.baseline.accuracy << "\n"
            << "full graph:      " << report.full_graph.accuracy << "\n"
            << "random graph:    " << report.random_graph.accuracy << "\n"
            << "optimized:       " << report.optimized.accuracy << "\n"
            << "report dir:      " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent swarms as optimizable computational graphs"};
  app.require_subcommand(1);

  GlobalOpts opts;
  app.add_option("--executor", opts.executor, "Executor backend: mock or http")
      ->check(CLI::IsMember({"mock", "http"}));
  auto* seed_opt = app.add_option("--seed", opts.seed, "Override config seed");

  std::string graph_path, config_path, params_path, out_path, resume_path;
  std::string question, gold;
  std::vector<std::string> options;
  bool show_trace = false;

  auto* run = app.add_subcommand("run", "Execute a graph file on a question");
  run->add_option("--graph", graph_path, "Graph definition JSON")->required();
  run->add_option("--question", question, "Input question")->required();
  run->add_option("--gold", gold,
                  "Optional gold answer registered with the mock backend");
  run->add_option("--options", options,
                  "Answer options for the mock backend (comma separated)")
      ->delimiter(',');
  run->add_flag("--trace", show_trace, "Print every node output");

  auto* opte = app.add_subcommand("optimize-edges",
                                  "REINFORCE optimization of edge logits");
  opte->add_option("--graph", graph_path, "Graph definition JSON")->required();
  opte->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  opte->add_option("--out", out_path, "Output directory")->required();
  opte->add_option("--resume", resume_path, "Parameter file to resume from");

  auto* optn = app.add_subcommand("optimize-nodes",
                                  "History-driven prompt optimization");
  optn->add_option("--graph", graph_path, "Graph definition JSON")->required();
  optn->add_option("--config", config_path, "Config JSON")->required();
  optn->add_option("--out", out_path, "Output directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a graph on a fresh task set");
  ev->add_option("--graph", graph_path, "Graph definition JSON")->required();
  ev->add_option("--config", config_path, "Config JSON")->required();
  ev->add_option("--params", params_path, "Optional learned-parameter file");
  ev->add_option("--out", out_path, "Output directory");

  auto* heat = app.add_subcommand("export-heatmap",
                                  "Write the probability matrix as CSV");
  heat->add_option("--params", params_path, "Learned-parameter file")
      ->required();
  heat->add_option("--graph", graph_path, "Optional graph definition JSON");
  heat->add_option("--out", out_path, "Output CSV path")->required();

  auto* adv = app.add_subcommand("adversarial-exp",
                                 "Adversarial-recovery experiment (mock)");
  adv->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  adv->add_option("--out", out_path, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  opts.seed_set = seed_opt->count() > 0;

  try {
    if (run->parsed()) {
      return cmd_run(opts, graph_path, question, gold, options, show_trace);
    }
    if (opte->parsed()) {
      return cmd_optimize_edges(opts, graph_path, config_path, out_path,
                                resume_path);
    }
    if (optn->parsed()) {
      return cmd_optimize_nodes(opts, graph_path, config_path, out_path);
    }
    if (ev->parsed()) {
      return cmd_eval(opts, graph_path, config_path, params_path, out_path);
    }
    if (heat->parsed()) {
      return cmd_export_heatmap(params_path, graph_path, out_path);
    }
    if (adv->parsed()) {
      return cmd_adversarial_exp(opts, config_path, out_path);
    }
  } catch (const sg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
