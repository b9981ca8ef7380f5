#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hecg/error_engine.hpp"
#include "hecg/graph.hpp"
#include "hecg/history.hpp"
#include "hecg/ifaces.hpp"

namespace hecg {

struct PolicyCoefficients {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double lambda = 1.0;
    double temperature = 1.0;
};

// Coefficient/threshold configuration file contents.
struct PolicyConfig {
    PolicyCoefficients coeffs;
    double epsilon_scale = 1.0;  // multiplies all node thresholds (sweeps)
    std::map<std::string, double> verb_risk;  // base risk per verb

    static PolicyConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Default per-verb base risk used when no config overrides it.
double base_verb_risk(const std::string& verb,
                      const std::map<std::string, double>& overrides = {});

struct TransitionScore {
    TaskEdge edge;
    double q = 0.0;    // task value toward remaining goals
    double c = 0.0;    // normalized remaining cost + per-kind surcharge
    double r = 0.0;    // failure risk in [0,1]
    double phi = 0.0;  // semantic feasibility in [0,1]
    double logit = 0.0;

    static double logit_of(double q, double c, double r, double phi,
                           const PolicyCoefficients& k) {
        return k.alpha * q - k.beta * c - k.gamma * r + k.lambda * phi;
    }
};

class EmptyCandidateSet : public EngineError {
public:
    EmptyCandidateSet() : EngineError("no candidate transitions to select from") {}
};

TransitionScore score_components(const TaskGraph& graph, const TaskEdge& edge,
                                 const BeliefContext& belief,
                                 const WorldState& observed,
                                 SemanticScorer& scorer,
                                 const PolicyCoefficients& coeffs,
                                 const std::map<std::string, double>& verb_risk = {},
                                 const std::set<std::string>* retrieved_verbs = nullptr);

struct SoftSelection {
    std::vector<double> distribution;  // sums to 1
    std::size_t chosen = 0;
    TaskEdge edge;
};

// Softmax over logit/temperature with seeded sampling. Temperature below
// 1e-9 degenerates to argmax (ties broken by lowest index).
SoftSelection select_soft(const std::vector<TransitionScore>& scores,
                          const PolicyCoefficients& coeffs, std::uint64_t seed);

// Three-branch threshold router: Main / Corr / Fb by error magnitude.
EdgeKind route_by_threshold(ErrorValue error, const TaskNode& node);

// Guard admissibility of one edge under the routed regime plus budgets.
bool eval_guard(const TaskGraph& graph, const TaskEdge& edge,
                const BeliefContext& belief, ErrorValue error);

}  // namespace hecg
