#include "hecg/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hecg/graph.hpp"

namespace hecg {

namespace {

struct Pred {
    std::string name;
    std::vector<std::string> args;
};

Pred split_pred(const Predicate& p) {
    Pred out;
    auto open = p.find('(');
    if (open == std::string::npos) {
        out.name = p;
        return out;
    }
    out.name = p.substr(0, open);
    auto close = p.rfind(')');
    std::string inner = p.substr(open + 1, close - open - 1);
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

std::string alternative_verb(const std::string& verb) {
    if (verb == "grab") return "push";
    if (verb == "push") return "grab";
    if (verb == "move") return "push";
    if (verb == "walk") return "walktowards";
    if (verb == "walktowards") return "walk";
    return "";
}

class ChainBuilder {
public:
    ChainBuilder(const WorldState& world, const std::set<BannedPair>& banned)
        : world_(world), banned_(banned) {}

    // Appends an action (or its alternative when banned), simulating effects.
    void emit(const std::string& verb, std::vector<std::string> args) {
        std::string use = verb;
        if (is_banned(verb, args[0])) {
            use = alternative_verb(verb);
            if (use.empty() || is_banned(use, args[0]))
                throw UnreachableGoal("every strategy for " + verb + " " + args[0] +
                                      " is banned");
        }
        ActionScript a;
        a.verb = use;
        a.args = std::move(args);
        a.raw = a.text();
        StepOutcome out = step(world_, a, {}, static_cast<int>(plan_.size()), 0);
        if (!out.succeeded)
            throw UnreachableGoal(a.text() + ": " + out.env_message);
        world_ = out.observed;
        plan_.push_back(a);
    }

    void ensure_at(const std::string& target) {
        std::string room;
        if (world_.rooms.count(target)) {
            room = target;
        } else {
            auto it = world_.objects.find(target);
            if (it == world_.objects.end()) throw UnreachableGoal(target + " not found");
            room = it->second.room;
        }
        if (world_.agent.room != room) emit("walk", {room});
    }

    void ensure_holding(const std::string& x) {
        if (world_.agent.holdings.count(x)) return;
        ensure_at(x);
        // Free the object from a closed container first.
        auto it = world_.objects.find(x);
        if (it != world_.objects.end()) {
            for (const auto& p : it->second.predicates) {
                Pred pp = split_pred(p);
                if (pp.name == "inside" && !pp.args.empty()) {
                    auto c = world_.objects.find(pp.args[0]);
                    if (c != world_.objects.end() && c->second.predicates.count("closed"))
                        emit("open", {pp.args[0]});
                }
            }
        }
        emit("grab", {x});
    }

    void chain(const Predicate& goal) {
        if (world_.satisfies(goal)) return;
        Pred g = split_pred(goal);
        if (g.name == "agent_in" || g.name == "reached") {
            ensure_at(g.args.at(0));
            if (!world_.satisfies(goal)) emit("walk", {g.args.at(0)});
        } else if (g.name == "grabbed") {
            ensure_holding(g.args.at(0));
        } else if (g.name == "open") {
            ensure_at(g.args.at(0));
            emit("open", {g.args.at(0)});
        } else if (g.name == "closed") {
            ensure_at(g.args.at(0));
            emit("close", {g.args.at(0)});
        } else if (g.name == "switched_on") {
            ensure_at(g.args.at(0));
            emit("switchon", {g.args.at(0)});
        } else if (g.name == "switched_off") {
            ensure_at(g.args.at(0));
            emit("switchoff", {g.args.at(0)});
        } else if (g.name == "cut") {
            ensure_at(g.args.at(0));
            emit("cut", {g.args.at(0)});
        } else if (g.name == "inside") {
            const std::string& x = g.args.at(0);
            const std::string& c = g.args.at(1);
            ensure_holding(x);
            ensure_at(c);
            if (!world_.objects.at(c).predicates.count("open")) emit("open", {c});
            emit("putin", {x, c});
        } else if (g.name == "on") {
            const std::string& x = g.args.at(0);
            const std::string& s = g.args.at(1);
            ensure_holding(x);
            ensure_at(s);
            emit("putback", {x, s});
        } else if (g.name == "sitting") {
            for (const auto& [name, o] : world_.objects) {
                if (o.predicates.count("sittable")) {
                    ensure_at(name);
                    emit("sit", {name});
                    return;
                }
            }
            throw UnreachableGoal(goal);
        } else {
            throw UnreachableGoal(goal);
        }
    }

    const std::vector<ActionScript>& plan() const { return plan_; }

private:
    bool is_banned(const std::string& verb, const std::string& arg) const {
        return banned_.count({verb, arg, world_.agent.room}) > 0;
    }

    WorldState world_;
    const std::set<BannedPair>& banned_;
    std::vector<ActionScript> plan_;
};

}  // namespace

GeneratedPlan StubPlanner::generate(const ReplanRequest& request) {
    ChainBuilder builder(request.world, request.banned);
    for (const auto& goal : request.goals) builder.chain(goal);

    GeneratedPlan out;
    out.plan = builder.plan();
    for (std::size_t i = 0; i < out.plan.size(); ++i) {
        const std::string& verb = out.plan[i].verb;
        if (verb != "grab" && verb != "push") continue;
        std::string alt_verb = alternative_verb(verb);
        // A banned strategy must not resurface as an option in any room.
        bool alt_banned = false;
        for (const auto& b : request.banned)
            if (b.verb == alt_verb && b.arg == out.plan[i].args[0]) alt_banned = true;
        if (alt_banned) continue;
        ActionScript alt;
        alt.verb = alt_verb;
        alt.args = out.plan[i].args;
        alt.raw = alt.text();
        out.options[static_cast<int>(i) + 1].push_back(alt);
    }
    return out;
}

double StubScorer::score(const ScoreContext& ctx) {
    const TaskNode& dst = ctx.graph->node(ctx.edge.dst);
    std::set<std::string> context = dst.task_context.tokens();

    std::set<std::string> pool;
    if (ctx.observed) {
        auto t = ctx.observed->tokens();
        pool.insert(t.begin(), t.end());
    }
    if (ctx.belief) {
        for (const auto& g : ctx.belief->goals) {
            pool.insert(g);
            Pred p = split_pred(g);
            pool.insert(p.name);
            pool.insert(p.args.begin(), p.args.end());
        }
    }

    double base = 0.0;
    if (!context.empty()) {
        std::size_t overlap = 0;
        for (const auto& t : context)
            if (pool.count(t)) ++overlap;
        base = static_cast<double>(overlap) / context.size();
    }

    double bonus = 0.0;
    const EpisodeHistory* h = ctx.belief ? ctx.belief->history : nullptr;
    if (ctx.edge.kind == EdgeKind::Corr && h && h->last_error &&
        h->last_error->recoverable != Recoverable::No)
        bonus += 0.5;
    if (ctx.edge.kind == EdgeKind::Fb && ctx.belief &&
        ctx.belief->consecutive_failures_of(ctx.edge.src) >= 3)
        bonus += 0.5;
    if (ctx.retrieved_recovery_verbs.count(dst.action.verb)) bonus += 0.2;

    return std::clamp(base + bonus, 0.0, 1.0);
}

std::string render_template(const std::string& templ, const ReplanRequest& request) {
    auto join = [](const auto& items, auto&& fmt) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += ", ";
            out += fmt(item);
        }
        return out;
    };
    std::string goals = join(request.goals, [](const Predicate& g) { return g; });
    std::string state =
        join(request.world.tokens(), [](const std::string& t) { return t; });
    std::string banned = join(request.banned, [](const BannedPair& b) {
        return b.verb + " " + b.arg + " in " + b.room;
    });

    std::string out = templ;
    auto replace_all = [&](const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = out.find(key, pos)) != std::string::npos) {
            out.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{goals}", goals);
    replace_all("{state}", state);
    replace_all("{banned}", banned);
    return out;
}

double extract_bounded_number(const std::string& reply) {
    for (std::size_t i = 0; i < reply.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(reply[i]))) continue;
        if (i > 0 && (std::isalnum(static_cast<unsigned char>(reply[i - 1])) ||
                      reply[i - 1] == '.'))
            continue;
        std::size_t end = i;
        while (end < reply.size() &&
               (std::isdigit(static_cast<unsigned char>(reply[end])) || reply[end] == '.'))
            ++end;
        try {
            double v = std::stod(reply.substr(i, end - i));
            if (v >= 0.0 && v <= 1.0) return v;
        } catch (const std::exception&) {
        }
        i = end;
    }
    throw MalformedReply(reply);
}

namespace {

std::string read_file_or(const std::string& path, const std::string& fallback) {
    if (path.empty()) return fallback;
    std::ifstream in(path);
    if (!in) return fallback;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

constexpr const char* kDefaultPlanTemplate =
    "Produce a household action plan, one script line per row in the form "
    "[verb] <arg> (<arg2>).\nGoals: {goals}\nWorld: {state}\nDo not use: {banned}\n";

constexpr const char* kDefaultScoreTemplate =
    "Rate the feasibility of the candidate transition between 0 and 1.\n"
    "Goals: {goals}\nWorld: {state}\n";

}  // namespace

std::string chat_completion(const HttpConfig& config, const std::string& prompt) {
    httplib::Client client(config.endpoint);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_connection_timeout(config.timeout_seconds, 0);

    httplib::Headers headers;
    if (!config.auth_env_var.empty()) {
        if (const char* token = std::getenv(config.auth_env_var.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    nlohmann::json body = {
        {"model", config.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config.temperature}};

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
        auto res = client.Post(config.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport failure";
            continue;
        }
        if (res->status == 401 || res->status == 403) throw AuthFailure();
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw MalformedReply("status " + std::to_string(res->status));
        try {
            auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw MalformedReply(res->body);
        }
    }
    throw EngineError("endpoint unreachable after retries: " + last_error);
}

HttpPlanner::HttpPlanner(HttpConfig config) : config_(std::move(config)) {}

GeneratedPlan HttpPlanner::generate(const ReplanRequest& request) {
    try {
        std::string templ = read_file_or(config_.plan_template_path, kDefaultPlanTemplate);
        std::string reply = chat_completion(config_, render_template(templ, request));

        GeneratedPlan out;
        std::istringstream lines(reply);
        std::string line;
        while (std::getline(lines, line)) {
            auto start = line.find('[');
            if (start == std::string::npos) continue;
            out.plan.push_back(parse_script(line.substr(start)));
        }
        if (out.plan.empty()) throw MalformedReply(reply);
        return out;
    } catch (const EngineError&) {
        if (config_.fallback_stub) return fallback_.generate(request);
        throw;
    }
}

HttpScorer::HttpScorer(HttpConfig config) : config_(std::move(config)) {}

double HttpScorer::score(const ScoreContext& ctx) {
    try {
        ReplanRequest req;
        if (ctx.belief) req.goals = ctx.belief->goals;
        if (ctx.observed) req.world = *ctx.observed;
        std::string templ =
            read_file_or(config_.score_template_path, kDefaultScoreTemplate);
        std::string prompt = render_template(templ, req);
        prompt += "Candidate: " + ctx.graph->node(ctx.edge.dst).action.text() +
                  " via " + to_string(ctx.edge.kind) + " edge\n";
        return std::clamp(extract_bounded_number(chat_completion(config_, prompt)), 0.0, 1.0);
    } catch (const EngineError&) {
        if (config_.fallback_stub) return fallback_.score(ctx);
        throw;
    }
}

}  // namespace hecg
