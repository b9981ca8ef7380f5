#include "hecg/traversal.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>

#include "hecg/metrics.hpp"
#include "hecg/planner.hpp"

namespace hecg {

const char* to_string(EpisodeStatus s) {
    switch (s) {
        case EpisodeStatus::Success: return "success";
        case EpisodeStatus::Failed: return "failed";
        case EpisodeStatus::Escalated: return "escalated";
        case EpisodeStatus::StepLimit: return "step_limit";
    }
    return "failed";
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, int counter) {
    return seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(counter) + 1;
}

struct Episode {
    const Scenario& scenario;
    const PolicyCoefficients& coeffs;
    Planner& planner;
    SemanticScorer& scorer;
    TrajectoryGraph* memory;
    const RunOptions& options;

    TaskGraph graph;
    WorldState world;
    FaultSchedule faults;
    EpisodeHistory history;
    NodeId cursor;
    int env_step = 0;
    int primary_steps = 0;
    int correction_steps = 0;
    std::set<std::string> pre_tokens;

    Episode(const TaskGraph& g, const Scenario& s, const PolicyCoefficients& k,
            Planner& p, SemanticScorer& sc, TrajectoryGraph* mem,
            const RunOptions& opt)
        : scenario(s), coeffs(k), planner(p), scorer(sc), memory(mem),
          options(opt), graph(g), world(s.world), faults(s.faults),
          cursor(g.root) {
        history.budgets = opt.budgets;
    }

    BeliefContext belief() const {
        BeliefContext b;
        b.current = cursor;
        b.steps_elapsed = primary_steps;
        b.history = &history;
        b.goals = scenario.goals;
        b.remaining_goals =
            static_cast<int>(check_goal(world, scenario.goals).unsatisfied.size());
        return b;
    }

    std::set<std::string> retrieved_recovery_verbs() const {
        std::set<std::string> verbs;
        if (!memory || memory->size() == 0) return verbs;
        RetrievalQuery q;
        for (const auto& g : scenario.goals) q.goal_tokens.insert(g);
        q.current_predicates = world.tokens();
        for (const auto& rec : history.records)
            if (!rec.level) q.recent_actions.push_back(rec.action);
        if (q.recent_actions.size() > TrajectoryGraph::kWindowSteps)
            q.recent_actions.erase(q.recent_actions.begin(),
                                   q.recent_actions.end() -
                                       TrajectoryGraph::kWindowSteps);
        // Recent actions are stored as full scripts; retrieval matches verbs.
        for (auto& a : q.recent_actions) {
            auto sp = a.find(']');
            if (a.size() > 1 && a[0] == '[' && sp != std::string::npos)
                a = a.substr(1, sp - 1);
        }
        for (const auto& hit : memory->retrieve(q, 3))
            verbs.insert(hit.recovery_patterns.begin(), hit.recovery_patterns.end());
        return verbs;
    }

    void log(const NodeId& node, const std::string& action, EdgeKind kind,
             double error, std::optional<ErrorType> type,
             std::optional<CorrectionLevel> level, bool ok,
             const std::string& message) {
        StepRecord rec;
        rec.step = env_step;
        rec.node = node;
        rec.action = action;
        rec.edge_kind = kind;
        rec.error_value = error;
        if (graph.nodes.count(node)) {
            rec.local_threshold = graph.node(node).local_threshold;
            rec.max_threshold = graph.node(node).max_threshold;
        }
        rec.error_type = type;
        rec.level = level;
        rec.succeeded = ok;
        rec.message = message;
        rec.state_tokens = pre_tokens;
        history.records.push_back(std::move(rec));
    }

    // Soft selection among guard-admissible Main/Opt edges out of `cursor`.
    bool advance(ErrorValue error) {
        std::vector<TransitionScore> scores;
        BeliefContext b = belief();
        std::set<std::string> retrieved = retrieved_recovery_verbs();
        for (const auto& e : outgoing(graph, cursor)) {
            if (e.kind != EdgeKind::Main && e.kind != EdgeKind::Opt) continue;
            if (!eval_guard(graph, e, b, error)) continue;
            scores.push_back(score_components(graph, e, b, world, scorer, coeffs,
                                              options.verb_risk,
                                              retrieved.empty() ? nullptr
                                                                : &retrieved));
        }
        if (scores.empty()) return false;
        SoftSelection pick =
            select_soft(scores, coeffs, mix_seed(scenario.seed, env_step));
        if (pick.edge.kind == EdgeKind::Opt) {
            // Entering an alternative consumes it from the option pool.
            for (const auto& [step, ids] : graph.alternatives) {
                (void)step;
                if (std::find(ids.begin(), ids.end(), pick.edge.dst) != ids.end())
                    history.options_tried[pick.edge.src].insert(pick.edge.dst);
            }
        }
        cursor = pick.edge.dst;
        return true;
    }

    void mark_recovered(const NodeId& node) {
        for (auto& f : history.failures)
            if (f.node == node && !f.recovered) f.recovered = true;
        history.consecutive_failures[node] = 0;
        history.last_error.reset();
    }

    EpisodeResult finish(EpisodeStatus status) {
        EpisodeResult r;
        r.status = status;
        r.steps = primary_steps;
        r.correction_steps = correction_steps;
        r.replans = history.replans_used;
        r.goal_ratio = check_goal(world, scenario.goals).ratio;
        r.final_state = world;
        r.history = std::move(history);
        if (memory) memory->ingest(r.history, scenario.goals);
        return r;
    }

    bool out_of_steps() const {
        return primary_steps + correction_steps >= scenario.step_limit;
    }

    EpisodeResult run() {
        while (true) {
            if (check_goal(world, scenario.goals).ratio >= 1.0)
                return finish(EpisodeStatus::Success);
            if (out_of_steps()) return finish(EpisodeStatus::StepLimit);
            if (graph.is_terminal(cursor)) {
                // Plan exhausted with goals unmet: the plan itself is wrong.
                if (history.replans_used < history.budgets.replans_per_episode &&
                    replan())
                    continue;
                return finish(EpisodeStatus::Failed);
            }
            if (cursor == graph.sentinel) {
                // The fallback sentinel is a replan demand, not an action.
                if (!replan()) return finish(EpisodeStatus::Escalated);
                continue;
            }

            const TaskNode node = graph.node(cursor);
            pre_tokens = world.tokens();
            StepOutcome outcome = step(world, node.action, faults, env_step++,
                                       scenario.seed, scenario.failure_prob);
            world = outcome.observed;
            ++primary_steps;
            ErrorValue error = compute_error(world, node.expected_outcome);
            EdgeKind regime = route_by_threshold(error, node);

            if (outcome.succeeded && regime == EdgeKind::Main) {
                log(node.id, node.action.text(), regime, error.value,
                    std::nullopt, std::nullopt, true, outcome.env_message);
                mark_recovered(node.id);
                if (!advance(error)) return finish(EpisodeStatus::Failed);
                continue;
            }

            // A step can succeed in the simulator yet leave the expected
            // outcome unmet (residual pose/integrity damage); classify the
            // mismatch rather than the step.
            ErrorClass cls =
                outcome.succeeded
                    ? (!world.agent.pose_ok
                           ? matrix_row(ErrorType::AgentPositioning)
                           : matrix_row(ErrorType::ActionExecution))
                    : classify(outcome, std::nullopt, history);
            log(node.id, node.action.text(), regime, error.value, cls.name,
                std::nullopt, false, outcome.env_message);
            history.last_error = cls;
            ++history.consecutive_failures[node.id];
            FailureRecord fail;
            fail.node = node.id;
            fail.action = node.action;
            fail.error = cls.name;
            fail.step = env_step - 1;
            fail.room = world.agent.room;
            history.failures.push_back(fail);
            std::size_t fi = history.failures.size() - 1;

            if (!correct(node, cls, error, fi)) return finish(EpisodeStatus::Escalated);
        }
    }

    // Correction dispatch at a failed node. Returns false on abort.
    bool correct(const TaskNode& node, ErrorClass cls, ErrorValue error,
                 std::size_t fi) {
        while (true) {
            if (out_of_steps()) return true;  // main loop reports the limit
            CorrectionLevel level = level_for(cls, error, node, graph, history);
            history.failures[fi].attempted_levels.push_back(level);

            if (level == CorrectionLevel::L1) {
                try {
                    EnvHandle handle = env();
                    CorrectionOutcome c = apply_l1(node, cls, handle, history);
                    correction_steps += static_cast<int>(c.executed.size());
                    // Logged with the triggering error so regime partitions
                    // reflect what the correction responded to.
                    log(node.id, c.executed.empty() ? "" : c.executed.back().text(),
                        EdgeKind::Corr, error.value, cls.name,
                        CorrectionLevel::L1, c.success, c.message);
                    if (c.success) {
                        history.failures[fi].recovered = true;
                        mark_recovered(node.id);
                        if (!advance({c.post_error})) return true;
                        return true;
                    }
                    error.value = c.post_error;
                    continue;
                } catch (const NoRuleMatches&) {
                    history.note_level(node.id, CorrectionLevel::L2);
                    continue;
                } catch (const BudgetExhausted&) {
                    history.note_level(node.id, CorrectionLevel::L2);
                    continue;
                }
            }

            if (level == CorrectionLevel::L2) {
                try {
                    TaskEdge e = apply_l2(graph, node.id, belief(), coeffs, scorer,
                                          mix_seed(scenario.seed, env_step),
                                          history, options.verb_risk);
                    ++correction_steps;
                    log(node.id, graph.node(e.dst).action.text(), EdgeKind::Corr,
                        error.value, cls.name, CorrectionLevel::L2, true,
                        "switched to alternative " + e.dst);
                    cursor = e.dst;
                    return true;
                } catch (const OptionsExhausted&) {
                    level = CorrectionLevel::L3;
                    history.note_level(node.id, CorrectionLevel::L3);
                }
            }

            if (level == CorrectionLevel::L3) {
                if (replan()) return true;
                level = CorrectionLevel::L4;
            }

            // L4: hand off to the operator.
            ++correction_steps;
            history.note_level(node.id, CorrectionLevel::L4);
            std::istream& in = options.l4_in ? *options.l4_in : std::cin;
            std::ostream& os = options.l4_out ? *options.l4_out : std::cerr;
            EpisodeTermination term =
                escalate_l4(history.failures, options.l4_mode, in, os);
            log(node.id, node.action.text(), EdgeKind::Fb, error.value, cls.name,
                CorrectionLevel::L4, term.decision != L4Decision::Abort,
                "operator escalation");
            switch (term.decision) {
                case L4Decision::Abort:
                    return false;
                case L4Decision::ForceRetry:
                    // The operator repaired the world: standing faults for this
                    // action are gone and local budgets start over.
                    faults.clear_sticky(node.action.verb);
                    history.l1_used.erase(node.id);
                    history.attempted_level.erase({history.plan_version, node.id});
                    return true;
                case L4Decision::SkipNode: {
                    auto next = graph.main_successor(node.id);
                    cursor = next ? *next : *graph.terminal.begin();
                    return true;
                }
            }
            return false;
        }
    }

    EnvHandle env() {
        EnvHandle h;
        h.state = &world;
        h.faults = &faults;
        h.seed = scenario.seed;
        h.step_counter = &env_step;
        h.failure_prob = scenario.failure_prob;
        return h;
    }

    // L3: regenerate the plan under banned pairs and restart from the new root.
    bool replan() {
        ReplanRequest req;
        req.goals = scenario.goals;
        req.world = world;
        req.banned = banned_pairs(history.failures);
        req.failures = history.failures;
        try {
            TaskGraph next = apply_l3(req, planner, scenario.thresholds, history);
            ++correction_steps;
            log(next.root, "replan", EdgeKind::Fb, 1.0, std::nullopt,
                CorrectionLevel::L3, true, "plan regenerated");
            graph = std::move(next);
            cursor = graph.root;
            return true;
        } catch (const EngineError& e) {
            log(cursor, "replan", EdgeKind::Fb, 1.0, std::nullopt,
                CorrectionLevel::L3, false, e.what());
            return false;
        }
    }
};

}  // namespace

EpisodeResult run_episode(const TaskGraph& graph, const Scenario& scenario,
                          const PolicyCoefficients& coeffs, Planner& planner,
                          SemanticScorer& scorer, TrajectoryGraph* memory,
                          const RunOptions& options) {
    ValidationReport report = validate(graph);
    if (!report.ok())
        throw InvalidGraph(report.issues[0].code + ": " + report.issues[0].detail);
    Episode ep(graph, scenario, coeffs, planner, scorer, memory, options);
    return ep.run();
}

std::vector<EpisodeResult> run_batch(const std::vector<Scenario>& scenarios,
                                     const BatchConfig& config, int repetitions,
                                     const std::vector<std::uint64_t>& seeds,
                                     Planner& planner, SemanticScorer& scorer,
                                     TrajectoryGraph* memory) {
    if (static_cast<int>(seeds.size()) != repetitions)
        throw ConfigError("seed list length must equal repetitions");
    std::vector<EpisodeResult> out;
    for (const auto& scenario : scenarios) {
        TaskGraph graph =
            build_graph(scenario.plan, scenario.options, scenario.thresholds);
        for (int rep = 0; rep < repetitions; ++rep) {
            Scenario run = scenario;
            run.seed = seeds[rep];
            out.push_back(run_episode(graph, run, config.coeffs, planner, scorer,
                                      memory, config.run));
        }
    }
    return out;
}

}  // namespace hecg
