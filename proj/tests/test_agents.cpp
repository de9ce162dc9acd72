#include <catch2/catch.hpp>

#include <algorithm>

#include "helpers.hpp"

using namespace swarmgraph;
using sgtest::nid;

TEST_CASE("io and adversarial builders produce single-node agents") {
  SECTION("io without role") {
    const AgentGraph g = build_io_agent("io1");
    CHECK(g.nodes.size() == 1);
    CHECK(g.required_edges.empty());
    CHECK(g.output_node == g.nodes[0].id);
    CHECK(g.nodes[0].param("system_prompt").find("knowledgeable expert") !=
          std::string::npos);
  }
  SECTION("role prefixes the system prompt") {
    const AgentGraph g = build_io_agent("io1", std::string("Botanist"));
    CHECK(g.nodes[0].param("system_prompt").find("Botanist") !=
          std::string::npos);
    CHECK(g.nodes[0].param("system_prompt").rfind("You are a Botanist", 0) ==
          0);
  }
  SECTION("adversarial structure matches io, prompt carries the marker") {
    const AgentGraph g = build_adversarial_agent("bad");
    CHECK(g.nodes.size() == 1);
    const ExecutorRequest req =
        render_request(g.nodes[0], {}, "What is the capital of France?");
    CHECK(req.user_content.rfind(kAdversarialMarker, 0) == 0);
  }
  SECTION("mock answers the adversarial template incorrectly") {
    TaskGenParams gen;
    gen.count = 40;
    const auto tasks = generate_tasks(gen, 3);
    MockPolicy policy;
    policy.truthful_accuracy = 1.0;
    policy.adversarial_accuracy = 0.0;
    MockExecutor ex(policy, tasks);
    const AgentGraph adv = build_adversarial_agent("bad");
    const AgentGraph io = build_io_agent("good");
    for (const auto& t : tasks) {
      CHECK(execute(adv, render_question(t), ex, t.problem_id).final_output !=
            t.gold);
      CHECK(execute(io, render_question(t), ex, t.problem_id).final_output ==
            t.gold);
    }
  }
}

TEST_CASE("chain builders lay out the documented shapes") {
  SECTION("three-step reasoning chain") {
    const AgentGraph g = build_cot_chain("cot", 3);
    CHECK(g.nodes.size() == 3);
    CHECK(g.required_edges.size() == 2);
    const auto order = topological_sort(g);
    CHECK(order == std::vector<NodeId>{{"cot", "step0"},
                                       {"cot", "step1"},
                                       {"cot", "step2"}});
  }
  SECTION("one step equals the io structure") {
    const AgentGraph g = build_cot_chain("cot", 1);
    CHECK(g.nodes.size() == 1);
    CHECK(g.required_edges.empty());
  }
  SECTION("zero steps rejected") {
    CHECK_THROWS_AS(build_cot_chain("cot", 0), DomainError);
  }
  SECTION("branching chain of depth eight") {
    const AgentGraph g = build_tot_chain("tot", 8, 2);
    CHECK(g.nodes.size() == 8);
    CHECK(g.required_edges.size() == 7);
  }
  SECTION("depth one is a single branching node") {
    const AgentGraph g = build_tot_chain("tot", 1);
    CHECK(g.nodes.size() == 1);
  }
  SECTION("payload doubles per branching node under the mock") {
    MockExecutor ex;
    for (int depth = 1; depth <= 5; ++depth) {
      const AgentGraph g = build_tot_chain("tot", depth, 2);
      const ExecutionTrace t = execute(g, "seed-solution", ex);
      const auto solutions = split_solutions(t.final_output);
      CHECK(solutions.size() == (std::size_t{1} << depth));
    }
  }
  SECTION("reflexion output carries original and revised solutions") {
    const AgentGraph g = build_reflexion_agent("re");
    CHECK(g.nodes.size() == 3);
    CHECK(g.required_edges.size() == 2);
    MockExecutor ex;
    const ExecutionTrace t = execute(g, "question", ex, "p9");
    const TraceRecord* critique = t.record_for({"re", "critique"});
    REQUIRE(critique != nullptr);
    REQUIRE(critique->context.entries.size() == 1);
    CHECK(critique->context.entries[0].producer == NodeId{"re", "propose"});
    const auto solutions = split_solutions(t.final_output);
    CHECK(std::any_of(solutions.begin(), solutions.end(), [](const auto& s) {
      return s.rfind("solution(", 0) == 0;
    }));
    CHECK(std::any_of(solutions.begin(), solutions.end(), [](const auto& s) {
      return s.rfind("revision(", 0) == 0;
    }));
  }
}

TEST_CASE("majority vote canonicalizes and breaks ties lexicographically") {
  CHECK(majority_vote({"A", "A", "B"}) == "A");
  CHECK(majority_vote({"A", "B"}) == "A");
  CHECK(majority_vote({"a ", "A"}) == "A");
  CHECK(majority_vote({"b", "B", "a"}) == "B");
  CHECK_THROWS_AS(majority_vote({}), EmptyInput);
}

TEST_CASE("majority vote is permutation invariant") {
  std::vector<std::string> answers = {"x", "y", "x", "z", "y", "x"};
  const std::string expected = majority_vote(answers);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    for (std::size_t j = answers.size() - 1; j > 0; --j) {
      std::swap(answers[j], answers[next_index(rng, j + 1)]);
    }
    CHECK(majority_vote(answers) == expected);
  }
}

TEST_CASE("decision nodes carry the documented strategies") {
  SECTION("majority vote is a pure function node") {
    const Node n = build_decision_node(DecisionKind::MajorityVote);
    CHECK(n.kind == RoutineKind::PureFunction);
    NodeContext ctx;
    ctx.entries = {{nid("x"), "A"}, {nid("y"), "A"}, {nid("z"), "B"}};
    CHECK(run_builtin(n, ctx, "q") == "A");
    CHECK(run_builtin(n, {}, "q").empty());  // abstains without inputs
  }
  SECTION("self-consistency node carries the template header") {
    const Node n = build_decision_node(DecisionKind::SelfConsistencyPrompt);
    CHECK(n.kind == RoutineKind::LlmQuery);
    CHECK(n.prompt.instruction.find("Self-Consistency Evaluation Task") !=
          std::string::npos);
    MockExecutor ex;
    NodeContext ctx;
    ctx.entries = {{nid("x"), "A"}, {nid("y"), "A"}, {nid("z"), "B"}};
    CHECK(ex.invoke(n, ctx, "q", "p") == "A");
    CHECK(ex.invoke(n, {}, "q", "p").empty());
  }
  SECTION("choose-best node carries the template header") {
    const Node n = build_decision_node(DecisionKind::ChooseBestPrompt);
    CHECK(n.prompt.instruction.find("Candidate Answers for Evaluation") !=
          std::string::npos);
  }
}

TEST_CASE("builders are deterministic and compose into the swarm shape") {
  SECTION("same parameters give identical graphs") {
    CHECK(build_io_agent("x") == build_io_agent("x"));
    CHECK(build_tot_chain("t", 4) == build_tot_chain("t", 4));
    CHECK(build_reflexion_agent("r") == build_reflexion_agent("r"));
  }
  SECTION("every builder output validates with a reachable output") {
    for (const AgentGraph& g :
         {build_io_agent("a"), build_adversarial_agent("b"),
          build_cot_chain("c", 3), build_tot_chain("d", 4),
          build_reflexion_agent("e")}) {
      CHECK_NOTHROW(g.validate());
      const auto order = topological_sort(g);
      CHECK(std::find(order.begin(), order.end(), g.output_node) !=
            order.end());
    }
  }
  SECTION("k truthful + k adversarial + decision has 2k+1 nodes") {
    for (int k : {1, 2, 3}) {
      SwarmSpec spec;
      spec.truthful = k;
      spec.adversarial = k;
      const CompositeGraph g = build_adversarial_swarm(spec);
      CHECK(g.node_count() == static_cast<std::size_t>(2 * k + 1));
      CHECK(g.output_node.agent == "decision");
    }
  }
}

TEST_CASE("agent templates build the matching structures") {
  AgentTemplate tpl;
  tpl.kind = AgentKind::Cot;
  tpl.params["steps"] = "3";
  CHECK(build_agent(tpl, "c").nodes.size() == 3);
  tpl.kind = AgentKind::Tot;
  tpl.params = {{"depth", "5"}, {"branching", "2"}};
  CHECK(build_agent(tpl, "t").nodes.size() == 5);
  tpl.kind = AgentKind::Io;
  tpl.params = {{"role", "Linguist"}};
  CHECK(build_agent(tpl, "i").nodes[0].param("system_prompt").find("Linguist") !=
        std::string::npos);
  CHECK(agent_kind_from_string("reflexion") == AgentKind::Reflexion);
  CHECK_THROWS_AS(agent_kind_from_string("nope"), DomainError);
}

TEST_CASE("role list data file mirrors the embedded defaults") {
  const json j = load_json_file(std::string(SWARMGRAPH_DATA_DIR) +
                                "/roles.json");
  const auto roles = j.at("roles").get<std::vector<std::string>>();
  CHECK(roles == default_io_roles());
  CHECK(roles.size() == 20);
}
