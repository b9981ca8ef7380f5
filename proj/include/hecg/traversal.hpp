#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "hecg/ccgr.hpp"
#include "hecg/correction.hpp"
#include "hecg/error_engine.hpp"
#include "hecg/graph.hpp"
#include "hecg/ifaces.hpp"
#include "hecg/policy.hpp"
#include "hecg/scenario.hpp"

namespace hecg {

class InvalidGraph : public EngineError {
public:
    explicit InvalidGraph(const std::string& what) : EngineError(what) {}
};
class ConfigError : public EngineError {
public:
    explicit ConfigError(const std::string& what) : EngineError(what) {}
};

enum class EpisodeStatus { Success, Failed, Escalated, StepLimit };
const char* to_string(EpisodeStatus s);

struct EpisodeResult {
    EpisodeStatus status = EpisodeStatus::Failed;
    int steps = 0;             // primary node executions only
    int correction_steps = 0;  // L1/L2 sub-steps plus L3 events
    int replans = 0;
    double goal_ratio = 0.0;
    WorldState final_state;
    EpisodeHistory history;
};

struct RunOptions {
    CorrectionBudgets budgets;
    std::map<std::string, double> verb_risk;
    L4Mode l4_mode = L4Mode::AutoAbort;
    std::istream* l4_in = nullptr;    // used in interactive mode
    std::ostream* l4_out = nullptr;
};

// Error-driven traversal: execute the current node, measure the error
// against its expected outcome, route through the threshold policy, and
// dispatch corrections until a terminal node, goal satisfaction, escalation,
// or the step limit.
EpisodeResult run_episode(const TaskGraph& graph, const Scenario& scenario,
                          const PolicyCoefficients& coeffs, Planner& planner,
                          SemanticScorer& scorer,
                          TrajectoryGraph* memory = nullptr,
                          const RunOptions& options = {});

struct BatchConfig {
    PolicyCoefficients coeffs;
    RunOptions run;
    ThresholdConfig thresholds;
};

// (scenario, repetition)-ordered batch; identical seeds reproduce identical
// results. Seed list length must equal `repetitions`.
std::vector<EpisodeResult> run_batch(const std::vector<Scenario>& scenarios,
                                     const BatchConfig& config, int repetitions,
                                     const std::vector<std::uint64_t>& seeds,
                                     Planner& planner, SemanticScorer& scorer,
                                     TrajectoryGraph* memory = nullptr);

}  // namespace hecg
