#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "hecg/env.hpp"
#include "hecg/history.hpp"

namespace hecg {

// Finest context the symbolic world exposes for "do not repeat" constraints.
struct BannedPair {
    std::string verb;
    std::string arg;
    std::string room;

    bool operator<(const BannedPair& o) const {
        return std::tie(verb, arg, room) < std::tie(o.verb, o.arg, o.room);
    }
    bool operator==(const BannedPair& o) const {
        return verb == o.verb && arg == o.arg && room == o.room;
    }
};

struct ReplanRequest {
    PredicateSet goals;
    WorldState world;
    std::set<BannedPair> banned;
    std::vector<FailureRecord> failures;
};

struct GeneratedPlan {
    std::vector<ActionScript> plan;
    std::map<int, std::vector<ActionScript>> options;  // 1-based step -> alternatives
};

class UnreachableGoal : public EngineError {
public:
    explicit UnreachableGoal(const std::string& goal)
        : EngineError("no action chain produces goal: " + goal) {}
};

class PlannerRejected : public EngineError {
public:
    explicit PlannerRejected(const std::string& why) : EngineError(why) {}
};

class Planner {
public:
    virtual ~Planner() = default;
    virtual GeneratedPlan generate(const ReplanRequest& request) = 0;
    virtual bool share_safe() const { return false; }
};

struct ScoreContext {
    const TaskGraph* graph = nullptr;
    TaskEdge edge;
    const BeliefContext* belief = nullptr;
    const WorldState* observed = nullptr;
    // Recovery-pattern verbs surfaced by trajectory retrieval.
    std::set<std::string> retrieved_recovery_verbs;
};

class ScorerUnavailable : public EngineError {
public:
    explicit ScorerUnavailable(const std::string& why) : EngineError(why) {}
};

class SemanticScorer {
public:
    virtual ~SemanticScorer() = default;
    // Semantic feasibility of taking `edge` now; clamped to [0,1].
    virtual double score(const ScoreContext& ctx) = 0;
    virtual bool share_safe() const { return false; }
};

}  // namespace hecg
