#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "hecg/env.hpp"
#include "hecg/graph.hpp"

using namespace hecg;

namespace {

std::vector<ActionScript> plan3() {
    return {parse_script("[walk] <kitchen>"), parse_script("[grab] <bananas>"),
            parse_script("[open] <fridge>")};
}

}  // namespace

TEST_CASE("linear plan compiles to chain with self-loops and fallback edges") {
    TaskGraph g = build_graph(plan3(), {}, {});
    CHECK(g.root == "a1");
    CHECK(g.terminal == std::set<NodeId>{"end"});
    CHECK(g.sentinel == "replan");
    CHECK(g.nodes.size() == 5);  // a1..a3 + end + replan

    CHECK(g.edges.count({"a1", EdgeKind::Main, "a2"}));
    CHECK(g.edges.count({"a2", EdgeKind::Main, "a3"}));
    CHECK(g.edges.count({"a3", EdgeKind::Main, "end"}));
    CHECK(g.edges.count({"replan", EdgeKind::Main, "end"}));
    for (const auto& id : {"a1", "a2", "a3"}) {
        CHECK(g.edges.count({id, EdgeKind::Corr, id}));
        CHECK(g.edges.count({id, EdgeKind::Fb, "replan"}));
    }

    int main_edges = 0;
    for (const auto& e : g.edges)
        if (e.kind == EdgeKind::Main) ++main_edges;
    CHECK(main_edges == 4);  // 3 chain links + sentinel discharge

    CHECK(*g.main_successor("a1") == "a2");
    CHECK(*g.main_successor("a3") == "end");
    CHECK(!g.main_successor("end").has_value());
}

TEST_CASE("expected outcome carries effect plus agent-integrity predicates") {
    TaskGraph g = build_graph(plan3(), {}, {});
    const TaskNode& grab = g.node("a2");
    CHECK(grab.expected_outcome.count("grabbed(bananas)"));
    CHECK(grab.expected_outcome.count("pose_ok(agent)"));
    CHECK(grab.expected_outcome.count("intact(agent)"));
    CHECK(grab.expected_outcome.size() >= 3);
}

TEST_CASE("option diamond branches at the predecessor and rejoins after the step") {
    std::map<int, std::vector<ActionScript>> options;
    options[2] = {parse_script("[push] <bananas>")};
    TaskGraph g = build_graph(plan3(), options, {});

    CHECK(g.edges.count({"a1", EdgeKind::Opt, "a2o1"}));
    CHECK(g.edges.count({"a2o1", EdgeKind::Opt, "a3"}));
    CHECK(g.edges.count({"a2o1", EdgeKind::Corr, "a2o1"}));
    CHECK(g.edges.count({"a2o1", EdgeKind::Fb, "replan"}));
    CHECK(g.alternatives_of("a2") == std::vector<NodeId>{"a2o1"});
    CHECK(g.alternatives_of("a2o1").empty());  // an alternative is not its own alternative
    CHECK(g.step_of.at("a2o1") == 2);
    CHECK(g.node("a2o1").successors == std::vector<NodeId>{"a3"});
}

TEST_CASE("options at the first and last step use the root and terminal anchors") {
    std::map<int, std::vector<ActionScript>> options;
    options[1] = {parse_script("[walktowards] <kitchen>")};
    options[3] = {parse_script("[close] <fridge>")};
    TaskGraph g = build_graph(plan3(), options, {});
    CHECK(g.edges.count({"a1", EdgeKind::Opt, "a1o1"}));
    CHECK(g.edges.count({"a1o1", EdgeKind::Opt, "a2"}));
    CHECK(g.edges.count({"a2", EdgeKind::Opt, "a3o1"}));
    CHECK(g.edges.count({"a3o1", EdgeKind::Opt, "end"}));
}

TEST_CASE("per-step threshold overrides apply to the step and its alternatives") {
    ThresholdConfig t;
    t.default_local = 0.2;
    t.default_max = 0.6;
    t.per_step[2] = {0.05, 0.3};
    std::map<int, std::vector<ActionScript>> options;
    options[2] = {parse_script("[push] <bananas>")};
    TaskGraph g = build_graph(plan3(), options, t);
    CHECK(g.node("a1").local_threshold == doctest::Approx(0.2));
    CHECK(g.node("a1").max_threshold == doctest::Approx(0.6));
    CHECK(g.node("a2").local_threshold == doctest::Approx(0.05));
    CHECK(g.node("a2").max_threshold == doctest::Approx(0.3));
    CHECK(g.node("a2o1").local_threshold == doctest::Approx(0.05));
}

TEST_CASE("malformed build inputs are rejected") {
    CHECK_THROWS_AS(build_graph({}, {}, {}), EmptyPlan);

    std::map<int, std::vector<ActionScript>> bad;
    bad[4] = {parse_script("[push] <bananas>")};
    CHECK_THROWS_AS(build_graph(plan3(), bad, {}), DanglingAlternative);
    bad.clear();
    bad[0] = {parse_script("[push] <bananas>")};
    CHECK_THROWS_AS(build_graph(plan3(), bad, {}), DanglingAlternative);

    ThresholdConfig t;
    t.default_local = 0.8;
    t.default_max = 0.5;
    CHECK_THROWS_AS(build_graph(plan3(), {}, t), ThresholdOrderViolation);
    t = {};
    t.per_step[1] = {0.9, 0.1};
    CHECK_THROWS_AS(build_graph(plan3(), {}, t), ThresholdOrderViolation);
}

TEST_CASE("validate flags structural violations by code") {
    TaskGraph g = build_graph(plan3(), {}, {});
    CHECK(validate(g).ok());

    auto has_issue = [](const ValidationReport& r, const std::string& code) {
        for (const auto& i : r.issues)
            if (i.code == code) return true;
        return false;
    };

    TaskGraph bad = g;
    bad.nodes["a2"].local_threshold = 0.9;  // above max 0.75
    CHECK(has_issue(validate(bad), "ThresholdOrderViolation"));

    bad = g;
    bad.edges.erase({"a2", EdgeKind::Main, "a3"});
    CHECK(has_issue(validate(bad), "MissingProgressEdge"));
    CHECK(has_issue(validate(bad), "TerminalUnreachable"));

    bad = g;
    bad.edges.insert({"a2", EdgeKind::Main, "a2"});
    CHECK(has_issue(validate(bad), "MainSelfLoop"));

    bad = g;
    bad.edges.insert({"a2", EdgeKind::Main, "ghost"});
    CHECK(has_issue(validate(bad), "UnknownEdgeEndpoint"));

    bad = g;
    bad.edges.insert({"a3", EdgeKind::Main, "a1"});
    CHECK(has_issue(validate(bad), "MainCycle"));

    bad = g;
    bad.root = "nowhere";
    CHECK(has_issue(validate(bad), "MissingRoot"));
}

TEST_CASE("outgoing edges are ordered Main < Opt < Corr < Fb") {
    std::map<int, std::vector<ActionScript>> options;
    options[2] = {parse_script("[push] <bananas>")};
    TaskGraph g = build_graph(plan3(), options, {});
    auto out = outgoing(g, "a1");
    REQUIRE(out.size() == 4);
    CHECK(out[0].kind == EdgeKind::Main);
    CHECK(out[1].kind == EdgeKind::Opt);
    CHECK(out[2].kind == EdgeKind::Corr);
    CHECK(out[3].kind == EdgeKind::Fb);
    CHECK(outgoing(g, "a1", EdgeKind::Opt).size() == 1);
    CHECK_THROWS_AS(outgoing(g, "ghost"), UnknownNode);
}

TEST_CASE("graph JSON round-trip is lossless") {
    ThresholdConfig t;
    t.per_step[2] = {0.05, 0.3};
    std::map<int, std::vector<ActionScript>> options;
    options[2] = {parse_script("[push] <bananas>")};
    TaskGraph g = build_graph(plan3(), options, t);

    TaskGraph back = graph_from_json(graph_to_json(g));
    CHECK(back.root == g.root);
    CHECK(back.terminal == g.terminal);
    CHECK(back.sentinel == g.sentinel);
    CHECK(back.edges == g.edges);
    CHECK(back.step_of == g.step_of);
    CHECK(back.alternatives == g.alternatives);
    CHECK(back.nodes.size() == g.nodes.size());
    for (const auto& [id, n] : g.nodes) {
        const TaskNode& b = back.node(id);
        CHECK(b.action == n.action);
        CHECK(b.expected_outcome == n.expected_outcome);
        CHECK(b.local_threshold == doctest::Approx(n.local_threshold));
        CHECK(b.max_threshold == doctest::Approx(n.max_threshold));
        CHECK(b.local_rules.size() == n.local_rules.size());
    }
    CHECK(graph_to_json(back) == graph_to_json(g));
    CHECK(validate(back).ok());
}
