#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

#ifdef _WIN32
#error "the cli tests assume a POSIX shell"
#endif
#include <sys/wait.h>

using namespace swarmgraph;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(SWARMGRAPH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("swarmgraph_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json demo_graph() {
  GraphDefinition def;
  def.agents = {build_io_agent("t00"), build_io_agent("t01"),
                build_decision_agent("decision", DecisionKind::MajorityVote)};
  def.output_agent = "decision";
  def.mandated_edges = {{{"t00", "answer"}, {"decision", "decide"}},
                        {{"t01", "answer"}, {"decision", "decide"}}};
  return graph_definition_to_json(def);
}

}  // namespace

TEST_CASE("cli rejects missing and invalid configuration") {
  SECTION("missing config file exits 1 without partial outputs") {
    const fs::path dir = fresh_dir("missing");
    const fs::path out = dir / "out";
    CHECK(run_cli("adversarial-exp --config " + (dir / "nope.json").string() +
                  " --out " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out / "report.json"));
  }
  SECTION("unknown subcommand exits nonzero") {
    CHECK(run_cli("frobnicate") == 1);
  }
  SECTION("http executor is rejected for the mock experiment") {
    const fs::path dir = fresh_dir("httpreject");
    write_json_file(dir / "cfg.json", json::object());
    CHECK(run_cli("adversarial-exp --executor http --config " +
                  (dir / "cfg.json").string() + " --out " +
                  (dir / "out").string()) == 1);
  }
}

TEST_CASE("cli run executes a graph file against the mock backend") {
  const fs::path dir = fresh_dir("run");
  write_json_file(dir / "graph.json", demo_graph());
  const std::string cmd = std::string(SWARMGRAPH_CLI_PATH) + " run --graph " +
                          (dir / "graph.json").string() +
                          " --question \"pick the answer\" --gold alpha" +
                          " > " + (dir / "out.txt").string() + " 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  // The vote returns the canonical (case-folded) winning answer.
  CHECK(read_file(dir / "out.txt") == "ALPHA\n");
}

TEST_CASE("cli optimize-edges and export-heatmap produce aligned artifacts") {
  const fs::path dir = fresh_dir("opt");
  write_json_file(dir / "graph.json", demo_graph());
  write_json_file(dir / "cfg.json",
                  json{{"edge_opt", {{"iterations", 5}}},
                       {"tasks", {{"count", 32}}},
                       {"seed", 3}});
  REQUIRE(run_cli("optimize-edges --graph " + (dir / "graph.json").string() +
                  " --config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "params.json"));
  CHECK(fs::exists(dir / "out" / "run_record.jsonl"));

  REQUIRE(run_cli("export-heatmap --params " +
                  (dir / "out" / "params.json").string() + " --out " +
                  (dir / "heat.csv").string()) == 0);
  const std::string csv = read_file(dir / "heat.csv");
  CHECK(csv.rfind("node,", 0) == 0);

  // With the graph supplied, mandated vote wires render as 1.0 cells.
  REQUIRE(run_cli("export-heatmap --params " +
                  (dir / "out" / "params.json").string() + " --graph " +
                  (dir / "graph.json").string() + " --out " +
                  (dir / "heat_full.csv").string()) == 0);
  CHECK(read_file(dir / "heat_full.csv").find(",1,") != std::string::npos);

  // Resume accepts its own parameter file.
  REQUIRE(run_cli("optimize-edges --graph " + (dir / "graph.json").string() +
                  " --config " + (dir / "cfg.json").string() + " --resume " +
                  (dir / "out" / "params.json").string() + " --out " +
                  (dir / "out2").string()) == 0);
}

TEST_CASE("cli optimize-nodes writes prompt and history snapshots") {
  const fs::path dir = fresh_dir("nodeopt");
  write_json_file(dir / "graph.json", demo_graph());
  write_json_file(dir / "cfg.json",
                  json{{"node_opt", {{"problems", 8}, {"update_every", 4}}},
                       {"tasks", {{"count", 16}}},
                       {"mock", {{"p_truthful", 0.7}}},
                       {"seed", 2}});
  REQUIRE(run_cli("optimize-nodes --graph " + (dir / "graph.json").string() +
                  " --config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "prompts.json"));
  CHECK(fs::exists(dir / "out" / "history.json"));
}

TEST_CASE("cli eval scores a graph on a fresh task set") {
  const fs::path dir = fresh_dir("eval");
  write_json_file(dir / "graph.json", demo_graph());
  write_json_file(dir / "cfg.json",
                  json{{"tasks", {{"eval_size", 25}}},
                       {"mock", {{"p_truthful", 1.0}}},
                       {"seed", 4}});
  REQUIRE(run_cli("eval --graph " + (dir / "graph.json").string() +
                  " --config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "out").string()) == 0);
  const json out = load_json_file(dir / "out" / "eval.json");
  CHECK(out.at("accuracy").get<double>() == 1.0);
}

TEST_CASE("cli adversarial-exp writes the full artifact set") {
  const fs::path dir = fresh_dir("adv");
  write_json_file(dir / "cfg.json",
                  json{{"swarm", {{"truthful", 1}, {"adversarial", 1}}},
                       {"edge_opt", {{"iterations", 8}}},
                       {"tasks", {{"opt_pool", 24}, {"eval_size", 12}}},
                       {"seed", 6}});
  REQUIRE(run_cli("adversarial-exp --config " + (dir / "cfg.json").string() +
                  " --out " + (dir / "out").string()) == 0);
  for (const char* name : {"report.json", "report.csv", "params.json",
                           "heatmap.csv", "run_record.jsonl", "timing.json"}) {
    CHECK(fs::exists(dir / "out" / name));
  }
  const json report = load_json_file(dir / "out" / "report.json");
  CHECK(report.at("potential_edge_count") == 4);
}
