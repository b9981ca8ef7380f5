#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hecg/env.hpp"
#include "hecg/graph.hpp"

namespace hecg {

class ScenarioError : public EngineError {
public:
    explicit ScenarioError(const std::string& what) : EngineError(what) {}
};

struct Scenario {
    std::string scene;
    WorldState world;
    PredicateSet goals;
    std::vector<ActionScript> plan;
    std::map<int, std::vector<ActionScript>> options;
    FaultSchedule faults;
    std::uint64_t seed = 0;
    ThresholdConfig thresholds;
    int step_limit = 100;
    double failure_prob = 0.0;

    static Scenario from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static Scenario load(const std::string& path);
};

}  // namespace hecg
