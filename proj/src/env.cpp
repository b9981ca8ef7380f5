#include "hecg/env.hpp"

#include <algorithm>
#include <cctype>
#include <random>

namespace hecg {

const char* to_string(ErrorType t) {
    switch (t) {
        case ErrorType::ActionNameMismatch: return "Action-Name-Mismatch-Error";
        case ErrorType::ScriptParsing: return "Script-Parsing-Error";
        case ErrorType::ActionExecution: return "Action-Execution-Error";
        case ErrorType::CascadingExecution: return "Cascading-Execution-Failure";
        case ErrorType::SensorFailure: return "Sensor-Failure-Error";
        case ErrorType::CollisionDetected: return "Collision-Detected-Error";
        case ErrorType::Timeout: return "Timeout-Error";
        case ErrorType::HardwareFault: return "Hardware-Fault-Error";
        case ErrorType::PerceptionMismatch: return "Perception-Mismatch-Error";
        case ErrorType::AgentPositioning: return "Agent-Positioning-Error";
    }
    return "Action-Execution-Error";
}

ErrorType error_type_from_string(const std::string& s) {
    for (int i = 0; i < kErrorTypeCount; ++i) {
        auto t = static_cast<ErrorType>(i);
        if (s == to_string(t)) return t;
    }
    throw EngineError("unknown error type: " + s);
}

namespace {

const std::vector<std::string> kVerbs = {
    "walk", "walktowards", "lookat", "grab",     "open",
    "close", "putin",       "putback", "switchon", "switchoff",
    "push", "move",         "cut",     "sit",      "standup"};

bool is_two_arg(const std::string& verb) {
    return verb == "putin" || verb == "putback";
}

// Splits "name(a,b)" into name and args.
struct ParsedPred {
    std::string name;
    std::vector<std::string> args;
};

ParsedPred parse_pred(const Predicate& p) {
    ParsedPred out;
    auto open = p.find('(');
    if (open == std::string::npos) {
        out.name = p;
        return out;
    }
    out.name = p.substr(0, open);
    auto close = p.rfind(')');
    std::string inner = p.substr(open + 1, close == std::string::npos
                                               ? std::string::npos
                                               : close - open - 1);
    std::string cur;
    for (char c : inner + ",") {
        if (c == ',') {
            if (!cur.empty()) out.args.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string suggest_verb(const std::string& verb) {
    std::string stripped;
    for (char c : verb)
        if (std::isalnum(static_cast<unsigned char>(c)))
            stripped += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& v : kVerbs)
        if (v == stripped) return v;
    std::string best;
    std::size_t best_d = 4;  // suggest only reasonably close verbs
    for (const auto& v : kVerbs) {
        std::size_t d = edit_distance(stripped, v);
        if (d < best_d) {
            best_d = d;
            best = v;
        }
    }
    return best;
}

}  // namespace

bool is_known_verb(const std::string& verb) {
    return std::find(kVerbs.begin(), kVerbs.end(), verb) != kVerbs.end();
}

const std::vector<std::string>& known_verbs() { return kVerbs; }

ActionScript parse_script(const std::string& text) {
    ActionScript out;
    out.raw = text;

    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto read_delimited = [&](char open, char close) -> std::string {
        skip_ws();
        if (i >= text.size() || text[i] != open)
            throw ScriptError({ParseIssueKind::Malformed, "expected '" + std::string(1, open) + "'", ""},
                              "malformed script: " + text);
        auto end = text.find(close, i + 1);
        if (end == std::string::npos)
            throw ScriptError({ParseIssueKind::Malformed, "unclosed '" + std::string(1, open) + "'", ""},
                              "malformed script: " + text);
        std::string inner = text.substr(i + 1, end - i - 1);
        i = end + 1;
        return inner;
    };

    out.verb = read_delimited('[', ']');
    if (out.verb.empty())
        throw ScriptError({ParseIssueKind::Malformed, "empty verb", ""},
                          "malformed script: " + text);

    while (true) {
        skip_ws();
        if (i >= text.size()) break;
        if (text[i] == '<') {
            out.args.push_back(read_delimited('<', '>'));
        } else if (text[i] == '(') {
            std::string id = read_delimited('(', ')');
            if (out.args.empty())
                throw ScriptError({ParseIssueKind::Malformed, "id before argument", ""},
                                  "malformed script: " + text);
            out.args.back() += "#" + id;
        } else {
            throw ScriptError({ParseIssueKind::Malformed,
                               "unexpected character '" + std::string(1, text[i]) + "'", ""},
                              "malformed script: " + text);
        }
    }

    if (!is_known_verb(out.verb)) {
        ParseIssue issue{ParseIssueKind::UnknownVerb,
                         "action name '" + out.verb + "' not supported",
                         suggest_verb(out.verb)};
        throw ScriptError(issue, issue.detail);
    }
    if (out.verb == "standup" && out.args.empty()) out.args.push_back("agent");
    if (out.args.empty() || (is_two_arg(out.verb) && out.args.size() < 2))
        throw ScriptError({ParseIssueKind::MissingParameter,
                           "action lacks necessary parameters", ""},
                          "missing parameter: " + text);
    if (out.args.size() > 2)
        throw ScriptError({ParseIssueKind::Malformed, "too many arguments", ""},
                          "malformed script: " + text);
    return out;
}

bool WorldState::satisfies(const Predicate& p) const {
    ParsedPred pp = parse_pred(p);
    auto obj = [&](const std::string& name) -> const ObjectState* {
        auto it = objects.find(name);
        return it == objects.end() ? nullptr : &it->second;
    };
    auto arg0 = [&]() -> const std::string& { return pp.args.at(0); };

    if (pp.name == "agent_in") return agent.room == arg0();
    if (pp.name == "pose_ok") return agent.pose_ok;
    if (pp.name == "intact") return agent.intact;
    if (pp.name == "sitting") return agent.sitting;
    if (pp.name == "standing") return !agent.sitting;
    if (pp.name == "grabbed") return agent.holdings.count(arg0()) > 0;
    if (pp.name == "reached") {
        if (rooms.count(arg0())) return agent.room == arg0();
        const auto* o = obj(arg0());
        return o && o->room == agent.room && agent.pose_ok;
    }
    if (pp.name == "in_room") {
        const auto* o = obj(arg0());
        return o && o->room == pp.args.at(1);
    }
    if (pp.name == "inside") {
        const auto* o = obj(arg0());
        return o && o->predicates.count("inside(" + pp.args.at(1) + ")") > 0;
    }
    if (pp.name == "on") {
        const auto* o = obj(arg0());
        return o && o->predicates.count("on(" + pp.args.at(1) + ")") > 0;
    }
    // Unary object-state predicates: open, closed, switched_on, cut, ...
    if (!pp.args.empty()) {
        const auto* o = obj(arg0());
        return o && o->predicates.count(pp.name) > 0;
    }
    return false;
}

std::set<std::string> WorldState::tokens() const {
    std::set<std::string> t;
    t.insert("agent_in(" + agent.room + ")");
    t.insert(agent.room);
    for (const auto& h : agent.holdings) {
        t.insert("grabbed(" + h + ")");
        t.insert(h);
    }
    for (const auto& [name, o] : objects) {
        t.insert(name);
        for (const auto& p : o.predicates) {
            ParsedPred pp = parse_pred(p);
            if (pp.args.empty())
                t.insert(pp.name + "(" + name + ")");
            else
                t.insert(pp.name + "(" + name + "," + pp.args[0] + ")");
        }
    }
    return t;
}

PredicateSet effect_predicates(const ActionScript& a) {
    const std::string& verb = a.verb;
    auto arg = [&](std::size_t i) { return a.args.at(i); };
    if (verb == "walk" || verb == "walktowards" || verb == "lookat")
        return {"reached(" + arg(0) + ")"};
    if (verb == "grab" || verb == "push" || verb == "move")
        return {"grabbed(" + arg(0) + ")"};
    if (verb == "open") return {"open(" + arg(0) + ")"};
    if (verb == "close") return {"closed(" + arg(0) + ")"};
    if (verb == "putin") return {"inside(" + arg(0) + "," + arg(1) + ")"};
    if (verb == "putback") return {"on(" + arg(0) + "," + arg(1) + ")"};
    if (verb == "switchon") return {"switched_on(" + arg(0) + ")"};
    if (verb == "switchoff") return {"switched_off(" + arg(0) + ")"};
    if (verb == "cut") return {"cut(" + arg(0) + ")"};
    if (verb == "sit") return {"sitting(agent)"};
    if (verb == "standup") return {"standing(agent)"};
    return {};
}

namespace {

bool object_in_closed_container(const WorldState& s, const ObjectState& o) {
    for (const auto& p : o.predicates) {
        ParsedPred pp = parse_pred(p);
        if (pp.name != "inside" || pp.args.empty()) continue;
        auto it = s.objects.find(pp.args[0]);
        if (it != s.objects.end() && it->second.predicates.count("closed")) return true;
    }
    return false;
}

}  // namespace

bool preconditions_hold(const WorldState& s, const ActionScript& a, std::string* msg) {
    auto fail = [&](const std::string& m) {
        if (msg) *msg = m;
        return false;
    };
    const std::string& verb = a.verb;
    const std::string& x = a.args.at(0);
    auto obj = [&](const std::string& name) -> const ObjectState* {
        auto it = s.objects.find(name);
        return it == s.objects.end() ? nullptr : &it->second;
    };

    if (verb == "walk" || verb == "walktowards") {
        if (!s.rooms.count(x) && !obj(x)) return fail(x + " not found");
        return true;
    }
    if (verb == "standup") {
        if (!s.agent.sitting) return fail("agent already standing");
        return true;
    }

    const ObjectState* o = obj(x);
    if (verb != "putin" && verb != "putback") {
        if (!o) return fail(x + " not found");
        if (o->room != s.agent.room) return fail(x + " not visible from here");
    }

    if (verb == "lookat") return true;
    if (verb == "grab" || verb == "push" || verb == "move") {
        if (s.agent.holdings.count(x)) return fail("already holding " + x);
        if (object_in_closed_container(s, *o))
            return fail(x + " is inside a closed container");
        if (s.agent.holdings.size() >= 2) return fail("hands full");
        return true;
    }
    if (verb == "open") {
        if (o->predicates.count("open")) return fail(x + " already opened");
        if (!o->predicates.count("closed")) return fail(x + " cannot be opened");
        return true;
    }
    if (verb == "close") {
        if (o->predicates.count("closed")) return fail(x + " already closed");
        if (!o->predicates.count("open")) return fail(x + " cannot be closed");
        return true;
    }
    if (verb == "switchon") {
        if (o->predicates.count("switched_on")) return fail(x + " already switched on");
        if (!o->predicates.count("switched_off")) return fail(x + " cannot be switched");
        return true;
    }
    if (verb == "switchoff") {
        if (!o->predicates.count("switched_on")) return fail(x + " is not switched on");
        return true;
    }
    if (verb == "cut") return true;
    if (verb == "sit") {
        if (s.agent.sitting) return fail("agent already sitting");
        return true;
    }
    if (verb == "putin" || verb == "putback") {
        const std::string& dest = a.args.at(1);
        const ObjectState* d = obj(dest);
        if (!s.agent.holdings.count(x)) return fail("not holding " + x);
        if (!d) return fail(dest + " not found");
        if (d->room != s.agent.room) return fail(dest + " not visible from here");
        if (verb == "putin" && !d->predicates.count("open"))
            return fail(dest + " is closed");
        return true;
    }
    return fail("no rule for verb " + verb);
}

namespace {

void apply_effects(WorldState& s, const ActionScript& a) {
    const std::string& verb = a.verb;
    const std::string& x = a.args.at(0);
    auto strip_placement = [&](ObjectState& o) {
        for (auto it = o.predicates.begin(); it != o.predicates.end();) {
            ParsedPred pp = parse_pred(*it);
            if (pp.name == "on" || pp.name == "inside")
                it = o.predicates.erase(it);
            else
                ++it;
        }
    };

    if (verb == "walk" || verb == "walktowards") {
        std::string room = s.rooms.count(x) ? x : s.objects.at(x).room;
        s.agent.room = room;
        s.agent.pose_ok = true;
        s.agent.sitting = false;
        for (const auto& h : s.agent.holdings) s.objects.at(h).room = room;
        return;
    }
    if (verb == "lookat") {
        s.agent.pose_ok = true;
        return;
    }
    if (verb == "grab" || verb == "push" || verb == "move") {
        auto& o = s.objects.at(x);
        strip_placement(o);
        o.predicates.insert("grabbed");
        o.room = s.agent.room;
        s.agent.holdings.insert(x);
        return;
    }
    if (verb == "open") {
        auto& o = s.objects.at(x);
        o.predicates.erase("closed");
        o.predicates.insert("open");
        return;
    }
    if (verb == "close") {
        auto& o = s.objects.at(x);
        o.predicates.erase("open");
        o.predicates.insert("closed");
        return;
    }
    if (verb == "switchon") {
        auto& o = s.objects.at(x);
        o.predicates.erase("switched_off");
        o.predicates.insert("switched_on");
        return;
    }
    if (verb == "switchoff") {
        auto& o = s.objects.at(x);
        o.predicates.erase("switched_on");
        o.predicates.insert("switched_off");
        return;
    }
    if (verb == "cut") {
        s.objects.at(x).predicates.insert("cut");
        return;
    }
    if (verb == "sit") {
        s.agent.sitting = true;
        return;
    }
    if (verb == "standup") {
        s.agent.sitting = false;
        return;
    }
    if (verb == "putin" || verb == "putback") {
        const std::string& dest = a.args.at(1);
        auto& o = s.objects.at(x);
        s.agent.holdings.erase(x);
        o.predicates.erase("grabbed");
        strip_placement(o);
        if (verb == "putin")
            o.predicates.insert("inside(" + dest + ")");
        else
            o.predicates.insert("on(" + dest + ")");
        o.room = s.objects.at(dest).room;
        return;
    }
}

}  // namespace

std::optional<FaultEntry> FaultSchedule::match(int step_index,
                                               const std::string& verb) const {
    for (const auto& e : entries) {
        bool step_ok = !e.step.has_value() || *e.step == step_index ||
                       (e.sticky && step_index >= *e.step);
        bool verb_ok = !e.verb.has_value() || *e.verb == verb;
        if (step_ok && verb_ok) return e;
    }
    return std::nullopt;
}

int FaultSchedule::clear_sticky(const std::string& verb) {
    int removed = 0;
    for (auto it = entries.begin(); it != entries.end();) {
        if (it->sticky && (!it->verb || *it->verb == verb)) {
            it = entries.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

int FaultSchedule::clear_sticky_type(ErrorType type) {
    int removed = 0;
    for (auto it = entries.begin(); it != entries.end();) {
        if (it->sticky && it->type == type) {
            it = entries.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

StepOutcome step(const WorldState& state, const ActionScript& action,
                 const FaultSchedule& faults, int step_index, std::uint64_t seed,
                 double failure_prob) {
    StepOutcome out;
    out.observed = state;
    const std::string& x = action.args.empty() ? action.verb : action.args[0];

    if (auto fault = faults.match(step_index, action.verb)) {
        out.injected = fault->type;
        out.succeeded = false;
        switch (fault->type) {
            case ErrorType::PerceptionMismatch:
                out.env_message = action.verb == "open"
                                      ? x + " already opened"
                                      : "perception mismatch: " + x +
                                            " pose differs from expected";
                break;
            case ErrorType::Timeout:
                out.env_message = "action timed out";
                break;
            case ErrorType::SensorFailure:
                out.env_message = "sensor failed to detect " + x;
                break;
            case ErrorType::CollisionDetected:
                out.env_message = "collided with obstacle during " + action.verb;
                out.observed.agent.pose_ok = false;
                out.observed.agent.intact = false;
                break;
            case ErrorType::AgentPositioning:
                out.env_message = "agent not positioned near " + x;
                out.observed.agent.pose_ok = false;
                break;
            case ErrorType::ActionExecution:
                out.env_message = x + " not found, not reachable, or not visible";
                break;
            case ErrorType::CascadingExecution:
                out.env_message = "cascading failure caused by previous action failure";
                break;
            case ErrorType::HardwareFault:
                out.env_message = "actuator malfunction: emergency stop required";
                out.hardware_halt = true;
                out.observed.agent.intact = false;
                break;
            case ErrorType::ActionNameMismatch:
                out.env_message = "action name '" + action.verb + "' not supported";
                break;
            case ErrorType::ScriptParsing:
                out.env_message =
                    "script parsing failure: action lacks necessary parameters";
                break;
        }
        return out;
    }

    if (failure_prob > 0.0) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(step_index));
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < failure_prob) {
            out.succeeded = false;
            out.env_message = x + " not reachable";
            return out;
        }
    }

    std::string why;
    if (!preconditions_hold(state, action, &why)) {
        out.succeeded = false;
        out.env_message = why;
        return out;
    }
    apply_effects(out.observed, action);
    out.succeeded = true;
    out.env_message = "ok";
    return out;
}

GoalReport check_goal(const WorldState& state, const PredicateSet& goals) {
    GoalReport report;
    for (const auto& g : goals) {
        if (state.satisfies(g))
            report.satisfied.insert(g);
        else
            report.unsatisfied.insert(g);
    }
    report.ratio = goals.empty()
                       ? 1.0
                       : static_cast<double>(report.satisfied.size()) / goals.size();
    return report;
}

}  // namespace hecg
