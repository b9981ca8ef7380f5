#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hecg/types.hpp"

namespace hecg {

// The ten execution error types of the error matrix.
enum class ErrorType {
    ActionNameMismatch,
    ScriptParsing,
    ActionExecution,
    CascadingExecution,
    SensorFailure,
    CollisionDetected,
    Timeout,
    HardwareFault,
    PerceptionMismatch,
    AgentPositioning
};

const char* to_string(ErrorType t);
ErrorType error_type_from_string(const std::string& s);
constexpr int kErrorTypeCount = 10;

struct ObjectState {
    std::string room;
    std::set<std::string> predicates;  // "open", "closed", "inside(fridge)", "on(table)", ...
};

struct AgentState {
    std::string room;
    std::set<std::string> holdings;
    bool pose_ok = true;
    bool intact = true;  // cleared by collision / hardware damage
    bool sitting = false;
};

struct WorldState {
    std::set<std::string> rooms;
    std::map<std::string, ObjectState> objects;
    AgentState agent;

    bool satisfies(const Predicate& p) const;
    // Tokens describing the current state, for retrieval / semantic overlap.
    std::set<std::string> tokens() const;
};

struct FaultEntry {
    std::optional<int> step;        // match a specific step index
    std::optional<std::string> verb;  // and/or a specific verb
    ErrorType type = ErrorType::ActionExecution;
    bool sticky = false;
};

struct FaultSchedule {
    std::vector<FaultEntry> entries;

    // First entry matching (step_index, verb); sticky entries keep matching
    // from their step onward until cleared.
    std::optional<FaultEntry> match(int step_index, const std::string& verb) const;
    // Removes sticky entries matching the verb (the documented correction
    // cleared the underlying condition). Returns the number removed.
    int clear_sticky(const std::string& verb);
    int clear_sticky_type(ErrorType type);
};

struct StepOutcome {
    WorldState observed;
    bool succeeded = false;
    std::string env_message;
    std::optional<ErrorType> injected;
    bool hardware_halt = false;
};

// Script parse failures, surfaced as data for downstream classification.
enum class ParseIssueKind { Malformed, MissingParameter, UnknownVerb };

struct ParseIssue {
    ParseIssueKind kind = ParseIssueKind::Malformed;
    std::string detail;
    std::string suggestion;  // filled for UnknownVerb when a close verb exists
};

class ScriptError : public EngineError {
public:
    ScriptError(ParseIssue issue, const std::string& what)
        : EngineError(what), issue(std::move(issue)) {}
    ParseIssue issue;
};

// Grammar: [verb] <arg> (id)? (<arg2> (id)?)?
// Verbs outside the registry throw ScriptError{UnknownVerb}; two-argument
// verbs (putin, putback) with one arg throw ScriptError{MissingParameter}.
ActionScript parse_script(const std::string& text);

bool is_known_verb(const std::string& verb);
const std::vector<std::string>& known_verbs();

// Primary effect predicates of an action (what expected_outcome asserts).
PredicateSet effect_predicates(const ActionScript& action);
// Whether the action's preconditions hold in `state`. On failure the
// returned message says which precondition missed.
bool preconditions_hold(const WorldState& state, const ActionScript& action,
                        std::string* message = nullptr);

// Applies one action to the world. Pure in its inputs: identical
// (state, action, faults, step_index, seed) yields identical outcomes.
// `failure_prob` adds seeded random execution failures (default off).
StepOutcome step(const WorldState& state, const ActionScript& action,
                 const FaultSchedule& faults, int step_index, std::uint64_t seed,
                 double failure_prob = 0.0);

struct GoalReport {
    PredicateSet satisfied;
    PredicateSet unsatisfied;
    double ratio = 1.0;  // 1 when the goal set is empty
};

GoalReport check_goal(const WorldState& state, const PredicateSet& goals);

}  // namespace hecg
