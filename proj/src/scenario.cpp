#include "hecg/scenario.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace hecg {

namespace {

WorldState world_from_json(const nlohmann::json& j) {
    WorldState w;
    for (const auto& r : j.value("rooms", std::vector<std::string>{}))
        w.rooms.insert(r);
    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        w.agent.room = a.value("room", std::string{});
        for (const auto& h : a.value("holdings", std::vector<std::string>{}))
            w.agent.holdings.insert(h);
        w.agent.pose_ok = a.value("pose_ok", true);
        w.agent.intact = a.value("intact", true);
        w.agent.sitting = a.value("sitting", false);
    }
    if (j.contains("objects")) {
        for (const auto& [name, o] : j.at("objects").items()) {
            ObjectState obj;
            obj.room = o.value("room", std::string{});
            for (const auto& p : o.value("predicates", std::vector<std::string>{}))
                obj.predicates.insert(p);
            w.objects[name] = std::move(obj);
        }
    }
    return w;
}

nlohmann::json world_to_json(const WorldState& w) {
    nlohmann::json objects = nlohmann::json::object();
    for (const auto& [name, o] : w.objects)
        objects[name] = {{"room", o.room}, {"predicates", o.predicates}};
    return {{"rooms", w.rooms},
            {"agent",
             {{"room", w.agent.room},
              {"holdings", w.agent.holdings},
              {"pose_ok", w.agent.pose_ok},
              {"intact", w.agent.intact},
              {"sitting", w.agent.sitting}}},
            {"objects", objects}};
}

}  // namespace

Scenario Scenario::from_json(const nlohmann::json& j) {
    try {
        Scenario s;
        s.scene = j.value("scene", std::string{});
        s.world = world_from_json(j.value("world", nlohmann::json::object()));
        for (const auto& g : j.value("goals", std::vector<std::string>{}))
            s.goals.insert(g);
        for (const auto& line : j.value("plan", std::vector<std::string>{}))
            s.plan.push_back(parse_script(line));
        if (j.contains("options")) {
            for (const auto& [step, alts] : j.at("options").items()) {
                int idx = std::stoi(step);
                for (const auto& line : alts)
                    s.options[idx].push_back(parse_script(line.get<std::string>()));
            }
        }
        if (j.contains("faults")) {
            for (const auto& f : j.at("faults")) {
                FaultEntry e;
                if (f.contains("step")) e.step = f.at("step").get<int>();
                if (f.contains("verb")) e.verb = f.at("verb").get<std::string>();
                e.type = error_type_from_string(f.at("type").get<std::string>());
                e.sticky = f.value("sticky", false);
                s.faults.entries.push_back(std::move(e));
            }
        }
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("thresholds")) {
            const auto& t = j.at("thresholds");
            s.thresholds.default_local = t.value("default_local", 0.25);
            s.thresholds.default_max = t.value("default_max", 0.75);
            if (t.contains("per_step")) {
                for (const auto& [step, pair] : t.at("per_step").items())
                    s.thresholds.per_step[std::stoi(step)] = {
                        pair.at(0).get<double>(), pair.at(1).get<double>()};
            }
        }
        s.step_limit = j.value("step_limit", 100);
        s.failure_prob = j.value("failure_prob", 0.0);
        return s;
    } catch (const ScriptError& e) {
        throw ScenarioError(std::string("bad plan line: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("malformed scenario: ") + e.what());
    }
}

nlohmann::json Scenario::to_json() const {
    nlohmann::json j;
    j["scene"] = scene;
    j["world"] = world_to_json(world);
    j["goals"] = goals;
    nlohmann::json plan_lines = nlohmann::json::array();
    for (const auto& a : plan) plan_lines.push_back(a.text());
    j["plan"] = plan_lines;
    if (!options.empty()) {
        nlohmann::json opts = nlohmann::json::object();
        for (const auto& [step, alts] : options) {
            nlohmann::json lines = nlohmann::json::array();
            for (const auto& a : alts) lines.push_back(a.text());
            opts[std::to_string(step)] = lines;
        }
        j["options"] = opts;
    }
    if (!faults.entries.empty()) {
        nlohmann::json fs = nlohmann::json::array();
        for (const auto& f : faults.entries) {
            nlohmann::json e = {{"type", to_string(f.type)}, {"sticky", f.sticky}};
            if (f.step) e["step"] = *f.step;
            if (f.verb) e["verb"] = *f.verb;
            fs.push_back(std::move(e));
        }
        j["faults"] = fs;
    }
    j["seed"] = seed;
    nlohmann::json per_step = nlohmann::json::object();
    for (const auto& [step, pair] : thresholds.per_step)
        per_step[std::to_string(step)] = {pair.first, pair.second};
    j["thresholds"] = {{"default_local", thresholds.default_local},
                       {"default_max", thresholds.default_max},
                       {"per_step", per_step}};
    j["step_limit"] = step_limit;
    j["failure_prob"] = failure_prob;
    return j;
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read scenario: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace hecg
