#include "hecg/graph.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

#include <nlohmann/json.hpp>

#include "hecg/env.hpp"

namespace hecg {

std::string ActionScript::text() const {
    std::string out = "[" + verb + "]";
    for (const auto& a : args) out += " <" + a + ">";
    return out;
}

const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Main: return "main";
        case EdgeKind::Opt: return "opt";
        case EdgeKind::Corr: return "corr";
        case EdgeKind::Fb: return "fb";
    }
    return "main";
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "main") return EdgeKind::Main;
    if (s == "opt") return EdgeKind::Opt;
    if (s == "corr") return EdgeKind::Corr;
    if (s == "fb") return EdgeKind::Fb;
    throw EngineError("unknown edge kind: " + s);
}

bool TaskEdge::operator<(const TaskEdge& o) const {
    return std::tie(src, kind, dst) < std::tie(o.src, o.kind, o.dst);
}

std::set<std::string> TaskContext::tokens() const {
    std::set<std::string> t = objects;
    std::string word;
    for (char c : label + " ") {
        if (c == ' ' || c == '_') {
            if (!word.empty()) t.insert(word);
            word.clear();
        } else {
            word += c;
        }
    }
    return t;
}

const TaskNode& TaskGraph::node(const NodeId& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw UnknownNode(id);
    return it->second;
}

std::vector<NodeId> TaskGraph::alternatives_of(const NodeId& id) const {
    auto step = step_of.find(id);
    if (step == step_of.end()) return {};
    auto alts = alternatives.find(step->second);
    if (alts == alternatives.end()) return {};
    std::vector<NodeId> out;
    for (const auto& a : alts->second)
        if (a != id) out.push_back(a);
    return out;
}

std::optional<NodeId> TaskGraph::main_successor(const NodeId& id) const {
    for (const auto& e : edges)
        if (e.src == id && e.kind == EdgeKind::Main && e.dst != id) return e.dst;
    return std::nullopt;
}

namespace {

std::vector<LocalCorrectionRule> default_rules(const std::string& verb) {
    std::vector<LocalCorrectionRule> rules;
    LocalCorrectionRule pm;
    pm.trigger_errors = {to_string(ErrorType::PerceptionMismatch)};
    pm.adjustment = (verb == "open" || verb == "close") ? AdjustKind::CloseThenOpen
                                                        : AdjustKind::Retry;
    pm.max_applications = 2;
    rules.push_back(pm);

    LocalCorrectionRule pos;
    pos.trigger_errors = {to_string(ErrorType::AgentPositioning)};
    pos.adjustment = AdjustKind::Reposition;
    pos.max_applications = 2;
    rules.push_back(pos);

    LocalCorrectionRule sensor;
    sensor.trigger_errors = {to_string(ErrorType::SensorFailure)};
    sensor.adjustment = AdjustKind::Reread;
    sensor.max_applications = 2;
    rules.push_back(sensor);

    LocalCorrectionRule retry;
    retry.trigger_errors = {to_string(ErrorType::Timeout),
                            to_string(ErrorType::ActionExecution)};
    retry.adjustment = AdjustKind::Retry;
    retry.max_applications = 2;
    rules.push_back(retry);
    return rules;
}

TaskNode make_action_node(NodeId id, const ActionScript& action,
                          double eps, double eps_max) {
    TaskNode n;
    n.id = std::move(id);
    n.action = action;
    n.task_context.label = action.verb;
    n.task_context.objects.insert(action.args.begin(), action.args.end());
    n.expected_outcome = effect_predicates(action);
    n.expected_outcome.insert("pose_ok(agent)");
    n.expected_outcome.insert("intact(agent)");
    n.local_threshold = eps;
    n.max_threshold = eps_max;
    n.local_rules = default_rules(action.verb);
    return n;
}

}  // namespace

TaskGraph build_graph(const std::vector<ActionScript>& plan,
                      const std::map<int, std::vector<ActionScript>>& options,
                      const ThresholdConfig& thresholds) {
    if (plan.empty()) throw EmptyPlan();
    const int n = static_cast<int>(plan.size());
    for (const auto& [k, alts] : options) {
        if (k < 1 || k > n) throw DanglingAlternative(k);
        (void)alts;
    }
    if (thresholds.default_local > thresholds.default_max)
        throw ThresholdOrderViolation();
    for (const auto& [k, pair] : thresholds.per_step) {
        (void)k;
        if (pair.first > pair.second) throw ThresholdOrderViolation();
    }

    auto thresholds_for = [&](int step) {
        auto it = thresholds.per_step.find(step);
        if (it != thresholds.per_step.end()) return it->second;
        return std::make_pair(thresholds.default_local, thresholds.default_max);
    };

    TaskGraph g;
    const NodeId terminal_id = "end";
    const NodeId sentinel_id = "replan";

    std::vector<NodeId> chain;
    for (int k = 1; k <= n; ++k) {
        NodeId id = "a" + std::to_string(k);
        auto [eps, eps_max] = thresholds_for(k);
        g.nodes[id] = make_action_node(id, plan[k - 1], eps, eps_max);
        g.step_of[id] = k;
        chain.push_back(id);
    }

    TaskNode terminal;
    terminal.id = terminal_id;
    terminal.task_context.label = "done";
    g.nodes[terminal_id] = terminal;

    TaskNode sentinel;
    sentinel.id = sentinel_id;
    sentinel.task_context.label = "replan";
    g.nodes[sentinel_id] = sentinel;

    g.root = chain.front();
    g.terminal = {terminal_id};
    g.sentinel = sentinel_id;

    auto add_edge = [&](const NodeId& s, EdgeKind k, const NodeId& d) {
        g.edges.insert({s, k, d});
    };

    for (int k = 0; k < n; ++k) {
        const NodeId& id = chain[k];
        const NodeId& next = (k + 1 < n) ? chain[k + 1] : terminal_id;
        add_edge(id, EdgeKind::Main, next);
        g.nodes[id].successors.push_back(next);
        add_edge(id, EdgeKind::Corr, id);
        add_edge(id, EdgeKind::Fb, sentinel_id);
    }
    add_edge(sentinel_id, EdgeKind::Main, terminal_id);

    for (const auto& [k, alts] : options) {
        // Decision point: the predecessor of step k (step k itself when k==1).
        const NodeId& decision = (k > 1) ? chain[k - 2] : chain[0];
        const NodeId& rejoin = (k < n) ? chain[k] : terminal_id;  // node k+1
        int j = 0;
        for (const auto& alt_action : alts) {
            NodeId alt_id = "a" + std::to_string(k) + "o" + std::to_string(++j);
            auto [eps, eps_max] = thresholds_for(k);
            g.nodes[alt_id] = make_action_node(alt_id, alt_action, eps, eps_max);
            g.step_of[alt_id] = k;
            g.alternatives[k].push_back(alt_id);
            add_edge(decision, EdgeKind::Opt, alt_id);
            add_edge(alt_id, EdgeKind::Opt, rejoin);
            add_edge(alt_id, EdgeKind::Corr, alt_id);
            add_edge(alt_id, EdgeKind::Fb, sentinel_id);
            g.nodes[alt_id].successors.push_back(rejoin);
        }
    }
    return g;
}

ValidationReport validate(const TaskGraph& graph) {
    ValidationReport report;
    auto issue = [&](const std::string& code, const std::string& detail) {
        report.issues.push_back({code, detail});
    };

    if (!graph.nodes.count(graph.root)) {
        issue("MissingRoot", "root node '" + graph.root + "' not in graph");
        return report;
    }
    for (const auto& t : graph.terminal)
        if (!graph.nodes.count(t)) issue("UnknownTerminal", t);

    for (const auto& [id, node] : graph.nodes) {
        if (node.local_threshold < 0 || node.max_threshold > 1 ||
            node.local_threshold > node.max_threshold)
            issue("ThresholdOrderViolation",
                  id + ": eps=" + std::to_string(node.local_threshold) +
                      " eps_max=" + std::to_string(node.max_threshold));
        if (!node.action.verb.empty() && node.expected_outcome.empty())
            issue("EmptyExpectedOutcome", id);
        for (const auto& s : node.successors)
            if (!graph.nodes.count(s)) issue("UnknownSuccessor", id + " -> " + s);
    }

    std::map<NodeId, int> progress_edges;
    for (const auto& e : graph.edges) {
        if (!graph.nodes.count(e.src)) issue("UnknownEdgeEndpoint", e.src);
        if (!graph.nodes.count(e.dst)) issue("UnknownEdgeEndpoint", e.dst);
        if (e.kind == EdgeKind::Main && e.src == e.dst) issue("MainSelfLoop", e.src);
        if ((e.kind == EdgeKind::Main || e.kind == EdgeKind::Opt) && e.src != e.dst)
            progress_edges[e.src]++;
    }
    for (const auto& [id, node] : graph.nodes) {
        (void)node;
        if (!graph.is_terminal(id) && progress_edges[id] == 0)
            issue("MissingProgressEdge", id);
    }

    // Main-subgraph acyclicity and terminal reachability from root.
    std::map<NodeId, int> color;  // 0 unseen, 1 in stack, 2 done
    bool cycle = false, reaches_terminal = false;
    std::vector<std::pair<NodeId, bool>> stack{{graph.root, false}};
    while (!stack.empty()) {
        auto [id, processed] = stack.back();
        stack.pop_back();
        if (processed) {
            color[id] = 2;
            continue;
        }
        if (color[id] == 1) continue;
        color[id] = 1;
        stack.push_back({id, true});
        if (graph.is_terminal(id)) reaches_terminal = true;
        for (const auto& e : graph.edges) {
            if (e.src != id || e.kind != EdgeKind::Main) continue;
            if (color[e.dst] == 1) cycle = true;
            if (color[e.dst] == 0) stack.push_back({e.dst, false});
        }
    }
    if (cycle) issue("MainCycle", "main-edge subgraph from root is cyclic");
    if (!reaches_terminal)
        issue("TerminalUnreachable", "no main path from root to a terminal node");
    return report;
}

std::vector<TaskEdge> outgoing(const TaskGraph& graph, const NodeId& node,
                               std::optional<EdgeKind> kind_filter) {
    if (!graph.nodes.count(node)) throw UnknownNode(node);
    std::vector<TaskEdge> out;
    for (const auto& e : graph.edges) {
        if (e.src != node) continue;
        if (kind_filter && e.kind != *kind_filter) continue;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const TaskEdge& a, const TaskEdge& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.dst < b.dst;
    });
    return out;
}

namespace {

const char* to_string(AdjustKind a) {
    switch (a) {
        case AdjustKind::Retry: return "retry";
        case AdjustKind::CloseThenOpen: return "close_then_open";
        case AdjustKind::Reposition: return "reposition";
        case AdjustKind::Reread: return "reread";
    }
    return "retry";
}

AdjustKind adjust_from_string(const std::string& s) {
    if (s == "retry") return AdjustKind::Retry;
    if (s == "close_then_open") return AdjustKind::CloseThenOpen;
    if (s == "reposition") return AdjustKind::Reposition;
    if (s == "reread") return AdjustKind::Reread;
    throw EngineError("unknown adjustment kind: " + s);
}

}  // namespace

nlohmann::json graph_to_json(const TaskGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, n] : graph.nodes) {
        nlohmann::json rules = nlohmann::json::array();
        for (const auto& r : n.local_rules)
            rules.push_back({{"triggers", r.trigger_errors},
                             {"adjustment", to_string(r.adjustment)},
                             {"max_applications", r.max_applications}});
        nodes.push_back({{"id", id},
                         {"label", n.task_context.label},
                         {"objects", n.task_context.objects},
                         {"action", n.action.raw.empty() ? n.action.text() : n.action.raw},
                         {"verb", n.action.verb},
                         {"args", n.action.args},
                         {"expected_outcome", n.expected_outcome},
                         {"local_threshold", n.local_threshold},
                         {"max_threshold", n.max_threshold},
                         {"rules", rules},
                         {"successors", n.successors}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges)
        edges.push_back({{"src", e.src}, {"kind", to_string(e.kind)}, {"dst", e.dst}});

    nlohmann::json steps = nlohmann::json::object();
    for (const auto& [id, k] : graph.step_of) steps[id] = k;
    nlohmann::json alts = nlohmann::json::object();
    for (const auto& [k, ids] : graph.alternatives) alts[std::to_string(k)] = ids;

    return {{"nodes", nodes},       {"edges", edges}, {"root", graph.root},
            {"terminal", graph.terminal}, {"sentinel", graph.sentinel},
            {"steps", steps},       {"alternatives", alts}};
}

TaskGraph graph_from_json(const nlohmann::json& j) {
    TaskGraph g;
    for (const auto& jn : j.at("nodes")) {
        TaskNode n;
        n.id = jn.at("id").get<NodeId>();
        n.task_context.label = jn.at("label").get<std::string>();
        n.task_context.objects = jn.at("objects").get<std::set<std::string>>();
        n.action.verb = jn.at("verb").get<std::string>();
        n.action.args = jn.at("args").get<std::vector<std::string>>();
        n.action.raw = jn.at("action").get<std::string>();
        n.expected_outcome = jn.at("expected_outcome").get<PredicateSet>();
        n.local_threshold = jn.at("local_threshold").get<double>();
        n.max_threshold = jn.at("max_threshold").get<double>();
        for (const auto& jr : jn.at("rules")) {
            LocalCorrectionRule r;
            r.trigger_errors = jr.at("triggers").get<std::set<std::string>>();
            r.adjustment = adjust_from_string(jr.at("adjustment").get<std::string>());
            r.max_applications = jr.at("max_applications").get<int>();
            n.local_rules.push_back(r);
        }
        n.successors = jn.at("successors").get<std::vector<NodeId>>();
        g.nodes[n.id] = n;
    }
    for (const auto& je : j.at("edges"))
        g.edges.insert({je.at("src").get<NodeId>(),
                        edge_kind_from_string(je.at("kind").get<std::string>()),
                        je.at("dst").get<NodeId>()});
    g.root = j.at("root").get<NodeId>();
    g.terminal = j.at("terminal").get<std::set<NodeId>>();
    g.sentinel = j.value("sentinel", NodeId{});
    if (j.contains("steps"))
        for (const auto& [id, k] : j.at("steps").items()) g.step_of[id] = k.get<int>();
    if (j.contains("alternatives"))
        for (const auto& [k, ids] : j.at("alternatives").items())
            g.alternatives[std::stoi(k)] = ids.get<std::vector<NodeId>>();
    return g;
}

}  // namespace hecg
