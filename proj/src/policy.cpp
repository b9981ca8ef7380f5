#include "hecg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

namespace hecg {

namespace {

const std::map<std::string, double>& default_verb_risk() {
    static const std::map<std::string, double> table = {
        {"walk", 0.05},     {"walktowards", 0.05}, {"lookat", 0.02},
        {"grab", 0.15},     {"open", 0.10},        {"close", 0.10},
        {"putin", 0.20},    {"putback", 0.15},     {"switchon", 0.10},
        {"switchoff", 0.10}, {"push", 0.10},       {"move", 0.10},
        {"cut", 0.25},      {"sit", 0.05},         {"standup", 0.02}};
    return table;
}

double kind_surcharge(EdgeKind k) {
    switch (k) {
        case EdgeKind::Main: return 0.0;
        case EdgeKind::Opt: return 0.1;
        case EdgeKind::Corr: return 0.05;
        case EdgeKind::Fb: return 0.3;
    }
    return 0.0;
}

// Progress continuation: the main successor, or the rejoin target for
// alternative nodes (which carry only an Opt edge forward).
std::optional<NodeId> progress_successor(const TaskGraph& g, const NodeId& id) {
    if (auto m = g.main_successor(id)) return m;
    const TaskNode& n = g.node(id);
    if (!n.successors.empty()) return n.successors.front();
    return std::nullopt;
}

// Number of progress hops from `id` to a terminal node.
int main_hops_to_terminal(const TaskGraph& g, NodeId id) {
    int hops = 0;
    while (!g.is_terminal(id)) {
        auto next = progress_successor(g, id);
        if (!next) break;
        id = *next;
        ++hops;
        if (hops > static_cast<int>(g.nodes.size())) break;  // cycle guard
    }
    return hops;
}

}  // namespace

double base_verb_risk(const std::string& verb,
                      const std::map<std::string, double>& overrides) {
    auto it = overrides.find(verb);
    if (it != overrides.end()) return it->second;
    auto dt = default_verb_risk().find(verb);
    return dt == default_verb_risk().end() ? 0.0 : dt->second;
}

PolicyConfig PolicyConfig::from_json(const nlohmann::json& j) {
    PolicyConfig c;
    c.coeffs.alpha = j.value("alpha", 1.0);
    c.coeffs.beta = j.value("beta", 1.0);
    c.coeffs.gamma = j.value("gamma", 1.0);
    c.coeffs.lambda = j.value("lambda", 1.0);
    c.coeffs.temperature = j.value("temperature", 1.0);
    c.epsilon_scale = j.value("epsilon_scale", 1.0);
    if (j.contains("verb_risk"))
        c.verb_risk = j.at("verb_risk").get<std::map<std::string, double>>();
    if (c.coeffs.temperature <= 0) throw EngineError("temperature must be positive");
    if (c.coeffs.alpha < 0 || c.coeffs.beta < 0 || c.coeffs.gamma < 0 ||
        c.coeffs.lambda < 0)
        throw EngineError("policy coefficients must be nonnegative");
    return c;
}

nlohmann::json PolicyConfig::to_json() const {
    nlohmann::json j = {{"alpha", coeffs.alpha},       {"beta", coeffs.beta},
                        {"gamma", coeffs.gamma},       {"lambda", coeffs.lambda},
                        {"temperature", coeffs.temperature},
                        {"epsilon_scale", epsilon_scale}};
    if (!verb_risk.empty()) j["verb_risk"] = verb_risk;
    return j;
}

TransitionScore score_components(const TaskGraph& graph, const TaskEdge& edge,
                                 const BeliefContext& belief,
                                 const WorldState& observed,
                                 SemanticScorer& scorer,
                                 const PolicyCoefficients& coeffs,
                                 const std::map<std::string, double>& verb_risk,
                                 const std::set<std::string>* retrieved_verbs) {
    if (!graph.edges.count(edge)) throw UnknownNode(edge.src + "->" + edge.dst);
    const TaskNode& dst = graph.node(edge.dst);

    TransitionScore s;
    s.edge = edge;

    // q: fraction of goals reachable along the destination's main continuation.
    if (belief.goals.empty()) {
        s.q = 1.0;
    } else {
        PredicateSet ahead = dst.expected_outcome;
        NodeId cursor = dst.id;
        int guard = 0;
        while (!graph.is_terminal(cursor) && guard++ < static_cast<int>(graph.nodes.size())) {
            auto next = progress_successor(graph, cursor);
            if (!next) break;
            cursor = *next;
            const auto& exp = graph.node(cursor).expected_outcome;
            ahead.insert(exp.begin(), exp.end());
        }
        std::size_t satisfiable = 0;
        for (const auto& g : belief.goals)
            if (observed.satisfies(g) || ahead.count(g)) ++satisfiable;
        s.q = static_cast<double>(satisfiable) / belief.goals.size();
    }

    // c: normalized remaining path length plus a per-kind surcharge.
    int total = std::max(1, main_hops_to_terminal(graph, graph.root));
    s.c = static_cast<double>(main_hops_to_terminal(graph, dst.id)) / total +
          kind_surcharge(edge.kind);

    s.r = std::min(1.0, 0.3 * belief.consecutive_failures_of(dst.id) +
                            base_verb_risk(dst.action.verb, verb_risk));

    ScoreContext ctx;
    ctx.graph = &graph;
    ctx.edge = edge;
    ctx.belief = &belief;
    ctx.observed = &observed;
    if (retrieved_verbs) ctx.retrieved_recovery_verbs = *retrieved_verbs;
    s.phi = std::clamp(scorer.score(ctx), 0.0, 1.0);

    s.logit = TransitionScore::logit_of(s.q, s.c, s.r, s.phi, coeffs);
    return s;
}

SoftSelection select_soft(const std::vector<TransitionScore>& scores,
                          const PolicyCoefficients& coeffs, std::uint64_t seed) {
    if (scores.empty()) throw EmptyCandidateSet();
    SoftSelection out;
    out.distribution.resize(scores.size());

    if (coeffs.temperature < 1e-9) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i)
            if (scores[i].logit > scores[best].logit) best = i;
        std::fill(out.distribution.begin(), out.distribution.end(), 0.0);
        out.distribution[best] = 1.0;
        out.chosen = best;
        out.edge = scores[best].edge;
        return out;
    }

    double max_logit = scores[0].logit;
    for (const auto& s : scores) max_logit = std::max(max_logit, s.logit);
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out.distribution[i] = std::exp((scores[i].logit - max_logit) / coeffs.temperature);
        sum += out.distribution[i];
    }
    for (auto& p : out.distribution) p /= sum;

    std::mt19937_64 rng(seed);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    out.chosen = scores.size() - 1;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        acc += out.distribution[i];
        if (u < acc) {
            out.chosen = i;
            break;
        }
    }
    out.edge = scores[out.chosen].edge;
    return out;
}

EdgeKind route_by_threshold(ErrorValue error, const TaskNode& node) {
    if (error.value <= node.local_threshold) return EdgeKind::Main;
    if (error.value <= node.max_threshold) return EdgeKind::Corr;
    return EdgeKind::Fb;
}

bool eval_guard(const TaskGraph& graph, const TaskEdge& edge,
                const BeliefContext& belief, ErrorValue error) {
    const TaskNode& src = graph.node(edge.src);
    EdgeKind regime = route_by_threshold(error, src);

    const EpisodeHistory* h = belief.history;
    auto l1_left = [&](const NodeId& id) {
        if (!h) return true;
        auto it = h->l1_used.find(id);
        return (it == h->l1_used.end() ? 0 : it->second) < h->budgets.l1_per_node;
    };
    auto option_untried = [&](const NodeId& dst) {
        if (!h) return true;
        for (const auto& [key, tried] : h->options_tried) {
            (void)key;
            if (tried.count(dst)) return false;
        }
        return true;
    };
    auto is_alternative = [&](const NodeId& id) {
        auto step = graph.step_of.find(id);
        if (step == graph.step_of.end()) return false;
        auto alts = graph.alternatives.find(step->second);
        if (alts == graph.alternatives.end()) return false;
        return std::find(alts->second.begin(), alts->second.end(), id) !=
               alts->second.end();
    };

    switch (edge.kind) {
        case EdgeKind::Main:
            return regime == EdgeKind::Main;
        case EdgeKind::Opt:
            if (regime != EdgeKind::Main) return false;
            return !is_alternative(edge.dst) || option_untried(edge.dst);
        case EdgeKind::Corr:
            return regime == EdgeKind::Corr && l1_left(edge.src);
        case EdgeKind::Fb:
            return regime == EdgeKind::Fb ||
                   (regime == EdgeKind::Corr && !l1_left(edge.src));
    }
    return false;
}

}  // namespace hecg
