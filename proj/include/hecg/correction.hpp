#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hecg/error_engine.hpp"
#include "hecg/graph.hpp"
#include "hecg/history.hpp"
#include "hecg/ifaces.hpp"
#include "hecg/policy.hpp"

namespace hecg {

// Mutable execution bindings handed to corrections: they run real simulator
// sub-steps against the episode's world and fault schedule.
struct EnvHandle {
    WorldState* state = nullptr;
    FaultSchedule* faults = nullptr;
    std::uint64_t seed = 0;
    int* step_counter = nullptr;  // advanced per executed sub-step
    double failure_prob = 0.0;
};

class NoRuleMatches : public EngineError {
public:
    NoRuleMatches() : EngineError("no local rule triggers on this error class") {}
};
class BudgetExhausted : public EngineError {
public:
    explicit BudgetExhausted(const std::string& what) : EngineError(what) {}
};
class OptionsExhausted : public EngineError {
public:
    OptionsExhausted() : EngineError("no unexhausted Opt edge at node") {}
};
class BannedActionEmitted : public EngineError {
public:
    explicit BannedActionEmitted(const std::string& what) : EngineError(what) {}
};

struct CorrectionOutcome {
    bool success = false;
    std::vector<ActionScript> executed;  // adjustment sub-steps that ran
    double post_error = 1.0;
    std::string message;
};

// L1: run the first matching local rule's adjustment scripts through the
// simulator; success iff the post-adjustment error is within the node's
// local threshold. Decrements the node's L1 budget.
CorrectionOutcome apply_l1(const TaskNode& node, const ErrorClass& cls,
                           EnvHandle& env, EpisodeHistory& history);

// L2: softmax selection restricted to the node's unexhausted alternatives.
// Marks the chosen option attempted.
TaskEdge apply_l2(const TaskGraph& graph, const NodeId& node,
                  const BeliefContext& belief, const PolicyCoefficients& coeffs,
                  SemanticScorer& scorer, std::uint64_t seed,
                  EpisodeHistory& history,
                  const std::map<std::string, double>& verb_risk = {});

// L3: regenerate the plan honoring banned pairs; a planner that emits a
// banned action is retried once, then rejected.
TaskGraph apply_l3(const ReplanRequest& request, Planner& planner,
                   const ThresholdConfig& thresholds, EpisodeHistory& history);

// Derives banned (verb, arg, room) pairs from failure records.
std::set<BannedPair> banned_pairs(const std::vector<FailureRecord>& failures);

enum class L4Mode { Interactive, AutoAbort };
enum class L4Decision { Abort, ForceRetry, SkipNode };

struct EpisodeTermination {
    L4Decision decision = L4Decision::Abort;
    std::vector<FailureRecord> dossier;
};

// L4: human escalation. Interactive mode reads "abort|retry|skip" from `in`;
// auto-abort terminates with the full failure dossier.
EpisodeTermination escalate_l4(const std::vector<FailureRecord>& history,
                               L4Mode mode, std::istream& in, std::ostream& out);

}  // namespace hecg
