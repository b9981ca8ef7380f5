#pragma once

#include <memory>
#include <string>

#include "hecg/ifaces.hpp"

namespace hecg {

// Deterministic rule-based planner: backward-chains each goal predicate
// through the verb effect table, honoring banned (verb, arg, room) pairs by
// switching to the verb-alternative table (grab <-> push).
class StubPlanner : public Planner {
public:
    GeneratedPlan generate(const ReplanRequest& request) override;
    bool share_safe() const override { return true; }
};

// Deterministic semantic scorer: token overlap between the edge target's
// task context and the goal/observation tokens, plus fixed bonuses for
// corrective edges after recoverable errors, fallback edges under repeated
// failure, and edges matching retrieved recovery patterns.
class StubScorer : public SemanticScorer {
public:
    double score(const ScoreContext& ctx) override;
    bool share_safe() const override { return true; }
};

struct HttpConfig {
    std::string endpoint;       // e.g. http://host:port
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string auth_env_var;   // env var holding the bearer token
    std::string plan_template_path;
    std::string score_template_path;
    double temperature = 0.0;
    int max_retries = 3;
    int timeout_seconds = 30;
    bool fallback_stub = false;
};

class MalformedReply : public EngineError {
public:
    explicit MalformedReply(const std::string& reply)
        : EngineError("unparsable model reply: " + reply) {}
};
class AuthFailure : public EngineError {
public:
    AuthFailure() : EngineError("authentication rejected by endpoint") {}
};

// Fills {goals}, {state}, {banned} placeholders in a template file's text.
std::string render_template(const std::string& templ, const ReplanRequest& request);
// First decimal number in [0,1] found in the reply text.
double extract_bounded_number(const std::string& reply);

class HttpPlanner : public Planner {
public:
    explicit HttpPlanner(HttpConfig config);
    GeneratedPlan generate(const ReplanRequest& request) override;
    bool share_safe() const override { return true; }

private:
    HttpConfig config_;
    StubPlanner fallback_;
};

class HttpScorer : public SemanticScorer {
public:
    explicit HttpScorer(HttpConfig config);
    double score(const ScoreContext& ctx) override;
    bool share_safe() const override { return true; }

private:
    HttpConfig config_;
    StubScorer fallback_;
};

// Raw chat-completion POST with retry/backoff; returns the reply content.
// Exposed so tests can exercise the wire format against a local server.
std::string chat_completion(const HttpConfig& config, const std::string& prompt);

}  // namespace hecg
