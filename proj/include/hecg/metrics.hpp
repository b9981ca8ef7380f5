#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hecg/traversal.hpp"

namespace hecg {

class MissingReference : public EngineError {
public:
    MissingReference() : EngineError("action accuracy requires a reference sequence") {}
};

// Chosen-edge-kind shares partitioned by error regime (low/moderate/high
// relative to each node's thresholds).
struct RegimeDistribution {
    // regime -> edge kind -> share; counts kept for aggregation.
    std::map<std::string, std::map<std::string, double>> share;
    std::map<std::string, std::map<std::string, int>> count;
};

struct MetricReport {
    std::optional<double> sr_final;
    std::optional<double> action_accuracy;
    std::optional<double> efficiency;
    std::optional<double> cv;  // absent when mean goal ratio is zero
    std::optional<double> improvement;

    std::optional<double> tsr;
    std::optional<double> tsr_r_sum;   // summed form, as printed
    std::optional<double> tsr_r_mean;  // mean over failed executions
    std::optional<double> tsr_c;       // absent when no replan-enabled successes
    std::map<std::string, double> error_type_ratio;
    std::map<std::string, double> error_family_ratio;

    std::optional<double> goal_compliance;
    std::optional<double> soft_recall;
    std::optional<double> soft_precision;  // convention, see README
    std::optional<double> soft_f1;
    std::optional<double> size_penalty;
    std::optional<double> final_score;  // convention: soft F1 x size penalty

    std::optional<double> mean_recovery_steps;
    RegimeDistribution regimes;

    nlohmann::json to_json() const;
    std::string to_table() const;  // aligned-column text
    std::string to_csv() const;
    void merge(const MetricReport& other);  // other's present fields win
};

// Fixed ten-type -> four-family mapping (grounding / precondition /
// affordance / execution).
const char* error_family(ErrorType type);

// All ground predicates currently true in a world, for change accounting.
PredicateSet state_predicates(const WorldState& state);

struct TaskGroup {
    std::string task;
    std::vector<EpisodeResult> results;
};

MetricReport plan_metrics(const std::vector<EpisodeResult>& results,
                          const std::optional<std::vector<ActionScript>>& reference,
                          int optimal_len);

MetricReport tsr_suite(const std::vector<TaskGroup>& groups);

MetricReport compliance_metrics(const WorldState& initial, const WorldState& final_state,
                                const std::map<Predicate, double>& weighted_goals,
                                int executed_len, int optimal_len);

RegimeDistribution regime_distribution(const std::vector<EpisodeResult>& results);

}  // namespace hecg
