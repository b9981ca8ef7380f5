#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hecg/types.hpp"

namespace hecg {

using NodeId = std::string;

enum class EdgeKind { Main, Opt, Corr, Fb };

const char* to_string(EdgeKind k);
EdgeKind edge_kind_from_string(const std::string& s);

// Local correction rule kinds (the adjustment part of C_i). The concrete
// script sequence is derived from the failing node's action at apply time.
enum class AdjustKind {
    Retry,          // re-issue the same action
    CloseThenOpen,  // [close] <x> then [open] <x>
    Reposition,     // [walk] <room> then re-issue the action
    Reread          // clear a sticky sensing fault, then re-issue
};

struct LocalCorrectionRule {
    std::set<std::string> trigger_errors;  // error-class names this rule handles
    AdjustKind adjustment = AdjustKind::Retry;
    int max_applications = 1;
};

struct TaskContext {
    std::string label;
    std::set<std::string> objects;

    std::set<std::string> tokens() const;
};

struct TaskNode {
    NodeId id;
    TaskContext task_context;
    ActionScript action;
    PredicateSet expected_outcome;
    double local_threshold = 0.25;  // epsilon
    double max_threshold = 0.75;    // epsilon max
    std::vector<LocalCorrectionRule> local_rules;
    std::vector<NodeId> successors;
};

struct TaskEdge {
    NodeId src;
    EdgeKind kind = EdgeKind::Main;
    NodeId dst;

    bool operator==(const TaskEdge& o) const {
        return src == o.src && kind == o.kind && dst == o.dst;
    }
    bool operator<(const TaskEdge& o) const;
};

struct ThresholdConfig {
    double default_local = 0.25;
    double default_max = 0.75;
    // Per plan-step overrides, keyed by 1-based step index.
    std::map<int, std::pair<double, double>> per_step;
};

struct TaskGraph {
    std::map<NodeId, TaskNode> nodes;
    std::set<TaskEdge> edges;
    NodeId root;
    std::set<NodeId> terminal;
    NodeId sentinel;  // target of every Fb edge

    // step index (1-based) -> alternative node ids, derived at build time
    std::map<int, std::vector<NodeId>> alternatives;
    // action node id -> its plan step index (alternatives share their step's index)
    std::map<NodeId, int> step_of;

    bool is_terminal(const NodeId& id) const { return terminal.count(id) > 0; }
    const TaskNode& node(const NodeId& id) const;

    // Alternative nodes usable in place of `id` (L2 candidates).
    std::vector<NodeId> alternatives_of(const NodeId& id) const;
    // Next main-chain node after `id`, if any.
    std::optional<NodeId> main_successor(const NodeId& id) const;
};

struct ValidationIssue {
    std::string code;  // e.g. "ThresholdOrderViolation"
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

class EmptyPlan : public EngineError {
public:
    EmptyPlan() : EngineError("empty plan") {}
};
class DanglingAlternative : public EngineError {
public:
    explicit DanglingAlternative(int index)
        : EngineError("alternative attached to invalid plan step " + std::to_string(index)),
          index(index) {}
    int index;
};
class ThresholdOrderViolation : public EngineError {
public:
    ThresholdOrderViolation() : EngineError("local threshold exceeds max threshold") {}
};
class UnknownNode : public EngineError {
public:
    explicit UnknownNode(const NodeId& id) : EngineError("unknown node: " + id) {}
};

// Compiles a linear plan plus per-step alternatives into the typed graph:
// one Main chain through the actions to a terminal node, Opt diamonds around
// steps with alternatives, a Corr self-loop and an Fb edge (to the replan
// sentinel) at every action node.
TaskGraph build_graph(const std::vector<ActionScript>& plan,
                      const std::map<int, std::vector<ActionScript>>& options,
                      const ThresholdConfig& thresholds);

ValidationReport validate(const TaskGraph& graph);

// Outgoing edges of `node`, ordered Main < Opt < Corr < Fb then by dst id.
std::vector<TaskEdge> outgoing(const TaskGraph& graph, const NodeId& node,
                               std::optional<EdgeKind> kind_filter = std::nullopt);

nlohmann::json graph_to_json(const TaskGraph& graph);
TaskGraph graph_from_json(const nlohmann::json& j);

}  // namespace hecg
