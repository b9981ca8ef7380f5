#include "hecg/error_engine.hpp"

#include <algorithm>

namespace hecg {

bool EpisodeHistory::has_unrecovered_failure() const {
    return std::any_of(failures.begin(), failures.end(),
                       [](const FailureRecord& f) { return !f.recovered; });
}

int EpisodeHistory::consecutive_failures_of(const NodeId& id) const {
    auto it = consecutive_failures.find(id);
    return it == consecutive_failures.end() ? 0 : it->second;
}

void EpisodeHistory::note_level(const NodeId& id, CorrectionLevel level) {
    auto key = std::make_pair(plan_version, id);
    auto it = attempted_level.find(key);
    if (it == attempted_level.end() || it->second < level) attempted_level[key] = level;
}

void EpisodeHistory::reset_for_new_plan() {
    ++plan_version;
    l1_used.clear();
    options_tried.clear();
    consecutive_failures.clear();
}

ErrorValue compute_error(const WorldState& observed, const PredicateSet& expected) {
    if (expected.empty()) return {0.0};
    std::size_t unsatisfied = 0;
    for (const auto& p : expected)
        if (!observed.satisfies(p)) ++unsatisfied;
    return {static_cast<double>(unsatisfied) / static_cast<double>(expected.size())};
}

ErrorClass classify(const StepOutcome& outcome,
                    const std::optional<ParseIssue>& parse_error,
                    const EpisodeHistory& history) {
    if (parse_error) {
        if (parse_error->kind == ParseIssueKind::UnknownVerb)
            return matrix_row(ErrorType::ActionNameMismatch);
        return matrix_row(ErrorType::ScriptParsing);
    }
    if (outcome.succeeded) throw NoFailurePresent();
    if (outcome.hardware_halt) return matrix_row(ErrorType::HardwareFault);
    if (history.has_unrecovered_failure())
        return matrix_row(ErrorType::CascadingExecution);
    if (outcome.injected) return matrix_row(*outcome.injected);

    const std::string& m = outcome.env_message;
    auto has = [&](const char* kw) { return m.find(kw) != std::string::npos; };
    if (has("collided") || has("collision")) return matrix_row(ErrorType::CollisionDetected);
    if (has("timed out") || has("timeout")) return matrix_row(ErrorType::Timeout);
    if (has("sensor")) return matrix_row(ErrorType::SensorFailure);
    if (has("not positioned")) return matrix_row(ErrorType::AgentPositioning);
    if (has("already")) return matrix_row(ErrorType::PerceptionMismatch);
    if (has("parsing")) return matrix_row(ErrorType::ScriptParsing);
    if (has("not supported")) return matrix_row(ErrorType::ActionNameMismatch);
    return matrix_row(ErrorType::ActionExecution);
}

CorrectionLevel level_for(const ErrorClass& cls, ErrorValue error,
                          const TaskNode& node, const TaskGraph& graph,
                          const EpisodeHistory& history) {
    const bool replan_left = history.replans_used < history.budgets.replans_per_episode;
    auto l1_used = history.l1_used.find(node.id);
    const bool l1_left =
        (l1_used == history.l1_used.end() ? 0 : l1_used->second) <
        history.budgets.l1_per_node;

    auto alt_tried = [&](const NodeId& alt) {
        for (const auto& [key, tried] : history.options_tried) {
            (void)key;
            if (tried.count(alt)) return true;
        }
        return false;
    };
    bool options_left = false;
    for (const auto& alt : graph.alternatives_of(node.id)) {
        if (!alt_tried(alt)) {
            options_left = true;
            break;
        }
    }

    CorrectionLevel level;
    if (cls.severity == Severity::Critical) {
        level = CorrectionLevel::L4;
    } else if (cls.recoverable == Recoverable::No) {
        // Unrecoverable in place; a replan can still repair the plan itself.
        level = replan_left ? CorrectionLevel::L3 : CorrectionLevel::L4;
    } else if (error.value <= node.max_threshold && l1_left) {
        level = CorrectionLevel::L1;
    } else if (options_left) {
        level = CorrectionLevel::L2;
    } else if (replan_left) {
        level = CorrectionLevel::L3;
    } else {
        level = CorrectionLevel::L4;
    }

    // Escalation is monotone per node within a plan version.
    auto prior = history.attempted_level.find({history.plan_version, node.id});
    if (prior != history.attempted_level.end() && level < prior->second)
        level = prior->second;
    return level;
}

}  // namespace hecg
