#include "hecg/correction.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace hecg {

namespace {

// The concrete sub-step scripts an adjustment expands to.
std::vector<ActionScript> adjustment_scripts(AdjustKind kind,
                                             const TaskNode& node,
                                             const WorldState& world) {
    auto make = [](std::string verb, std::vector<std::string> args) {
        ActionScript a;
        a.verb = std::move(verb);
        a.args = std::move(args);
        a.raw = a.text();
        return a;
    };
    const ActionScript& act = node.action;
    switch (kind) {
        case AdjustKind::Retry:
        case AdjustKind::Reread:
            return {act};
        case AdjustKind::CloseThenOpen:
            return {make("close", {act.args.at(0)}), make("open", {act.args.at(0)})};
        case AdjustKind::Reposition: {
            std::string room = world.agent.room;
            auto it = world.objects.find(act.args.at(0));
            if (it != world.objects.end()) room = it->second.room;
            if (world.rooms.count(act.args.at(0))) room = act.args.at(0);
            return {make("walk", {room}), act};
        }
    }
    return {act};
}

}  // namespace

CorrectionOutcome apply_l1(const TaskNode& node, const ErrorClass& cls,
                           EnvHandle& env, EpisodeHistory& history) {
    auto used = history.l1_used.find(node.id);
    if ((used == history.l1_used.end() ? 0 : used->second) >=
        history.budgets.l1_per_node)
        throw BudgetExhausted("local correction budget exhausted at " + node.id);

    const LocalCorrectionRule* rule = nullptr;
    for (const auto& r : node.local_rules) {
        if (r.trigger_errors.count(to_string(cls.name))) {
            rule = &r;
            break;
        }
    }
    if (!rule) throw NoRuleMatches();

    ++history.l1_used[node.id];
    history.note_level(node.id, CorrectionLevel::L1);

    // Cause-addressing adjustments remove the standing condition; a bare
    // retry must beat the fault on its own.
    if (rule->adjustment != AdjustKind::Retry)
        env.faults->clear_sticky_type(cls.name);

    CorrectionOutcome out;
    for (const auto& script :
         adjustment_scripts(rule->adjustment, node, *env.state)) {
        StepOutcome result = step(*env.state, script, *env.faults,
                                  (*env.step_counter)++, env.seed, env.failure_prob);
        *env.state = result.observed;
        out.executed.push_back(script);
        out.message = result.env_message;
    }
    out.post_error = compute_error(*env.state, node.expected_outcome).value;
    out.success = out.post_error <= node.local_threshold;
    return out;
}

TaskEdge apply_l2(const TaskGraph& graph, const NodeId& node,
                  const BeliefContext& belief, const PolicyCoefficients& coeffs,
                  SemanticScorer& scorer, std::uint64_t seed,
                  EpisodeHistory& history,
                  const std::map<std::string, double>& verb_risk) {
    auto alt_tried = [&](const NodeId& alt) {
        for (const auto& [key, tried] : history.options_tried) {
            (void)key;
            if (tried.count(alt)) return true;
        }
        return false;
    };
    std::vector<TaskEdge> candidates;
    for (const auto& alt : graph.alternatives_of(node)) {
        if (alt_tried(alt)) continue;
        for (const auto& e : graph.edges)
            if (e.kind == EdgeKind::Opt && e.dst == alt) candidates.push_back(e);
    }
    if (candidates.empty()) throw OptionsExhausted();

    std::vector<TransitionScore> scores;
    for (const auto& e : candidates) {
        const TaskNode& dst = graph.node(e.dst);
        TransitionScore s;
        s.edge = e;
        s.q = 1.0;  // alternatives rejoin the same step; value is equal
        s.c = 0.1;  // flat option-switch surcharge
        s.r = std::min(1.0, 0.3 * belief.consecutive_failures_of(e.dst) +
                                base_verb_risk(dst.action.verb, verb_risk));
        ScoreContext ctx;
        ctx.graph = &graph;
        ctx.edge = e;
        ctx.belief = &belief;
        s.phi = std::clamp(scorer.score(ctx), 0.0, 1.0);
        s.logit = TransitionScore::logit_of(s.q, s.c, s.r, s.phi, coeffs);
        scores.push_back(s);
    }

    SoftSelection pick = select_soft(scores, coeffs, seed);
    history.options_tried[node].insert(pick.edge.dst);
    history.note_level(node, CorrectionLevel::L2);
    return pick.edge;
}

std::set<BannedPair> banned_pairs(const std::vector<FailureRecord>& failures) {
    // Banning exists to force a strategy switch; verbs with no substitute
    // strategy are retried by the replanner instead of banned, since a ban
    // would make their goals permanently unreachable.
    static const std::set<std::string> switchable = {"grab", "push", "move",
                                                     "walk", "walktowards"};
    std::set<BannedPair> out;
    for (const auto& f : failures) {
        if (f.recovered || f.action.args.empty()) continue;
        if (!switchable.count(f.action.verb)) continue;
        out.insert({f.action.verb, f.action.args[0], f.room});
    }
    return out;
}

TaskGraph apply_l3(const ReplanRequest& request, Planner& planner,
                   const ThresholdConfig& thresholds, EpisodeHistory& history) {
    if (history.replans_used >= history.budgets.replans_per_episode)
        throw BudgetExhausted("replan budget exhausted");

    auto violates_ban = [&](const GeneratedPlan& plan) -> std::string {
        auto banned = [&](const ActionScript& a) {
            if (a.args.empty()) return false;
            for (const auto& b : request.banned)
                if (b.verb == a.verb && b.arg == a.args[0]) return true;
            return false;
        };
        for (const auto& a : plan.plan)
            if (banned(a)) return a.text();
        for (const auto& [k, alts] : plan.options) {
            (void)k;
            for (const auto& a : alts)
                if (banned(a)) return a.text();
        }
        return "";
    };

    GeneratedPlan plan = planner.generate(request);
    std::string offending = violates_ban(plan);
    if (!offending.empty()) {
        // One retry; a planner that repeats the violation is rejected.
        plan = planner.generate(request);
        offending = violates_ban(plan);
        if (!offending.empty())
            throw BannedActionEmitted("planner insists on banned action " + offending);
    }
    if (plan.plan.empty()) throw PlannerRejected("planner produced an empty plan");

    TaskGraph graph = build_graph(plan.plan, plan.options, thresholds);
    ValidationReport report = validate(graph);
    if (!report.ok())
        throw PlannerRejected("replanned graph invalid: " + report.issues[0].code);

    ++history.replans_used;
    history.reset_for_new_plan();
    return graph;
}

EpisodeTermination escalate_l4(const std::vector<FailureRecord>& history,
                               L4Mode mode, std::istream& in, std::ostream& out) {
    EpisodeTermination term;
    term.dossier = history;
    if (mode == L4Mode::AutoAbort) {
        term.decision = L4Decision::Abort;
        return term;
    }

    out << "escalation: automated correction exhausted\n";
    for (const auto& f : history) {
        out << "  step " << f.step << "  " << f.action.text() << "  "
            << to_string(f.error) << "  levels:";
        for (auto l : f.attempted_levels) out << " " << to_string(l);
        out << (f.recovered ? "  (recovered)" : "  (unrecovered)") << "\n";
    }
    out << "decision [abort|retry|skip]: " << std::flush;

    std::string line;
    if (!std::getline(in, line)) line = "abort";
    if (line == "retry")
        term.decision = L4Decision::ForceRetry;
    else if (line == "skip")
        term.decision = L4Decision::SkipNode;
    else
        term.decision = L4Decision::Abort;
    return term;
}

}  // namespace hecg
