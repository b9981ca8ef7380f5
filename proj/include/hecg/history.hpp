#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hecg/error_matrix.hpp"
#include "hecg/graph.hpp"

namespace hecg {

// One trajectory log record. Correction sub-steps get their own records with
// `level` set; primary node executions leave it empty.
struct StepRecord {
    int step = 0;
    NodeId node;
    std::string action;
    EdgeKind edge_kind = EdgeKind::Main;
    double error_value = 0.0;
    // Node thresholds at the time of the step, so logs stay regime-partitionable.
    double local_threshold = 0.25;
    double max_threshold = 0.75;
    std::optional<ErrorType> error_type;
    std::optional<CorrectionLevel> level;
    bool succeeded = true;
    std::string message;
    // World tokens observed before the action ran (feeds trajectory memory).
    std::set<std::string> state_tokens;
};

struct FailureRecord {
    NodeId node;
    ActionScript action;
    ErrorType error = ErrorType::ActionExecution;
    int step = 0;
    std::vector<CorrectionLevel> attempted_levels;
    std::string room;  // agent room at failure time, for banned-pair context
    bool recovered = false;
};

struct CorrectionBudgets {
    int l1_per_node = 2;
    int replans_per_episode = 2;
};

struct EpisodeHistory {
    std::vector<StepRecord> records;
    std::vector<FailureRecord> failures;
    CorrectionBudgets budgets;

    int plan_version = 0;  // bumped on every L3 replan; node budgets reset
    int replans_used = 0;
    std::map<NodeId, int> l1_used;                  // keyed within current plan version
    std::map<NodeId, std::set<NodeId>> options_tried;
    std::map<NodeId, int> consecutive_failures;
    std::optional<ErrorClass> last_error;
    // Highest correction level attempted per (plan version, node).
    std::map<std::pair<int, NodeId>, CorrectionLevel> attempted_level;

    bool has_unrecovered_failure() const;
    int consecutive_failures_of(const NodeId& id) const;
    void note_level(const NodeId& id, CorrectionLevel level);
    // Called on an L3 replan: new graph, fresh per-node budgets.
    void reset_for_new_plan();
};

// Execution-context features standing in for the belief state: where the
// traversal is, how it has been failing, and what remains to achieve.
struct BeliefContext {
    NodeId current;
    int steps_elapsed = 0;
    const EpisodeHistory* history = nullptr;
    PredicateSet goals;
    int remaining_goals = 0;

    int consecutive_failures_of(const NodeId& id) const {
        return history ? history->consecutive_failures_of(id) : 0;
    }
};

}  // namespace hecg
