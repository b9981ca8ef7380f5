#include "hecg/ccgr.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

namespace hecg {

const char* to_string(MemoryKind k) {
    switch (k) {
        case MemoryKind::State: return "state";
        case MemoryKind::Action: return "action";
        case MemoryKind::Outcome: return "outcome";
    }
    return "state";
}

const char* to_string(MemoryRelation r) {
    switch (r) {
        case MemoryRelation::Temporal: return "temporal";
        case MemoryRelation::Causes: return "causes";
        case MemoryRelation::Enables: return "enables";
        case MemoryRelation::RecoversFrom: return "recovers_from";
    }
    return "temporal";
}

namespace {

MemoryKind kind_from_string(const std::string& s) {
    if (s == "action") return MemoryKind::Action;
    if (s == "outcome") return MemoryKind::Outcome;
    return MemoryKind::State;
}

MemoryRelation relation_from_string(const std::string& s) {
    if (s == "causes") return MemoryRelation::Causes;
    if (s == "enables") return MemoryRelation::Enables;
    if (s == "recovers_from") return MemoryRelation::RecoversFrom;
    return MemoryRelation::Temporal;
}

std::string verb_of(const std::string& action_text) {
    if (action_text.size() > 1 && action_text[0] == '[') {
        auto end = action_text.find(']');
        if (end != std::string::npos) return action_text.substr(1, end - 1);
    }
    auto sp = action_text.find(' ');
    return action_text.substr(0, sp);
}

std::set<std::string> action_payload(const std::string& action_text) {
    std::set<std::string> out;
    std::string tok;
    for (char c : action_text + " ") {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#') {
            tok += c;
        } else {
            if (!tok.empty()) out.insert(tok);
            tok.clear();
        }
    }
    out.insert("verb:" + verb_of(action_text));
    return out;
}

}  // namespace

int TrajectoryGraph::ingest(const EpisodeHistory& history, const PredicateSet& goals) {
    const int episode = next_episode_++;
    const std::size_t before = nodes_.size();

    // One State -> Action -> Outcome triple per primary step, laid out
    // contiguously so windows can be reconstructed by index.
    struct StepRef {
        std::size_t state, action, outcome;
        const StepRecord* rec;
    };
    std::vector<StepRef> steps;
    for (const auto& rec : history.records) {
        if (rec.level) continue;
        StepRef ref{};
        ref.rec = &rec;
        int step_index = static_cast<int>(steps.size());

        MemoryNode state;
        state.kind = MemoryKind::State;
        state.payload = rec.state_tokens;
        state.payload.insert(goals.begin(), goals.end());
        state.episode = episode;
        state.step = step_index;
        ref.state = nodes_.size();
        nodes_.push_back(std::move(state));

        MemoryNode action;
        action.kind = MemoryKind::Action;
        action.payload = action_payload(rec.action);
        action.episode = episode;
        action.step = step_index;
        ref.action = nodes_.size();
        nodes_.push_back(std::move(action));

        MemoryNode outcome;
        outcome.kind = MemoryKind::Outcome;
        outcome.payload.insert(rec.succeeded ? "outcome:ok" : "outcome:fail");
        if (rec.error_type) outcome.payload.insert(to_string(*rec.error_type));
        outcome.episode = episode;
        outcome.step = step_index;
        ref.outcome = nodes_.size();
        nodes_.push_back(std::move(outcome));

        steps.push_back(ref);
    }

    for (std::size_t i = 0; i < steps.size(); ++i) {
        edges_.push_back({steps[i].state, steps[i].action, MemoryRelation::Temporal});
        edges_.push_back({steps[i].action, steps[i].outcome, MemoryRelation::Temporal});
        if (i + 1 < steps.size())
            edges_.push_back(
                {steps[i].outcome, steps[i + 1].state, MemoryRelation::Temporal});
        edges_.push_back({steps[i].action, steps[i].outcome, MemoryRelation::Causes});
        // A successful step's preconditions held in its pre-state.
        if (steps[i].rec->succeeded)
            edges_.push_back(
                {steps[i].state, steps[i].action, MemoryRelation::Enables});
    }

    // Correction sub-steps become recovery actions linked to the failing
    // outcome they addressed.
    std::size_t record_index = 0;
    std::size_t last_failed_outcome = 0;
    bool have_failed_outcome = false;
    std::size_t primary_seen = 0;
    for (const auto& rec : history.records) {
        (void)record_index;
        if (!rec.level) {
            if (!rec.succeeded && primary_seen < steps.size()) {
                last_failed_outcome = steps[primary_seen].outcome;
                have_failed_outcome = true;
            }
            ++primary_seen;
            continue;
        }
        // Only corrections that worked count as recovery patterns.
        if (!have_failed_outcome || rec.action.empty() || !rec.succeeded) continue;
        MemoryNode recovery;
        recovery.kind = MemoryKind::Action;
        recovery.payload = action_payload(rec.action);
        recovery.episode = episode;
        recovery.step = primary_seen > 0 ? static_cast<int>(primary_seen) - 1 : 0;
        std::size_t idx = nodes_.size();
        nodes_.push_back(std::move(recovery));
        edges_.push_back({idx, last_failed_outcome, MemoryRelation::RecoversFrom});
    }

    return static_cast<int>(nodes_.size() - before);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a)
        if (b.count(x)) ++inter;
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

double lcs_ratio(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return 0.0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[b.size()]) / std::max(a.size(), b.size());
}

std::vector<RetrievalResult> TrajectoryGraph::retrieve(
    const RetrievalQuery& query, int k, const RetrievalWeights& weights) const {
    // Reconstruct the per-episode step triples from the contiguous layout.
    struct Triple {
        std::size_t state, action, outcome;
    };
    std::map<int, std::vector<Triple>> episodes;
    for (std::size_t i = 0; i + 2 < nodes_.size(); ++i) {
        if (nodes_[i].kind != MemoryKind::State) continue;
        if (nodes_[i + 1].kind != MemoryKind::Action ||
            nodes_[i + 2].kind != MemoryKind::Outcome)
            continue;
        if (nodes_[i + 1].episode != nodes_[i].episode ||
            nodes_[i + 1].step != nodes_[i].step)
            continue;
        episodes[nodes_[i].episode].push_back({i, i + 1, i + 2});
        i += 2;
    }

    std::set<std::string> query_semantic = query.goal_tokens;
    query_semantic.insert(query.current_predicates.begin(),
                          query.current_predicates.end());

    std::vector<RetrievalResult> results;
    for (const auto& [episode, triples] : episodes) {
        int n = static_cast<int>(triples.size());
        int window = std::min(kWindowSteps, n);
        if (window == 0) continue;
        for (int start = 0; start + window <= n; ++start) {
            RetrievalResult r;
            r.episode = episode;
            r.window_start = start;
            r.window_end = start + window - 1;

            std::set<std::string> semantic;
            std::vector<std::string> verbs;
            for (int i = start; i < start + window; ++i) {
                const Triple& t = triples[i];
                r.node_refs.insert(r.node_refs.end(),
                                   {t.state, t.action, t.outcome});
                semantic.insert(nodes_[t.state].payload.begin(),
                                nodes_[t.state].payload.end());
                semantic.insert(nodes_[t.outcome].payload.begin(),
                                nodes_[t.outcome].payload.end());
                for (const auto& tok : nodes_[t.action].payload) {
                    if (tok.rfind("verb:", 0) == 0) verbs.push_back(tok.substr(5));
                }
                for (const auto& tok : nodes_[t.outcome].payload)
                    if (tok != "outcome:ok" && tok != "outcome:fail")
                        r.failure_modes.push_back(tok);
                for (const auto& e : edges_) {
                    if (e.relation == MemoryRelation::RecoversFrom &&
                        e.dst == t.outcome) {
                        for (const auto& tok : nodes_[e.src].payload)
                            if (tok.rfind("verb:", 0) == 0)
                                r.recovery_patterns.push_back(tok.substr(5));
                    }
                }
            }
            r.candidate_actions = verbs;
            r.semantic_score = jaccard(query_semantic, semantic);
            r.structural_score = lcs_ratio(query.recent_actions, verbs);
            r.combined_score = weights.semantic * r.semantic_score +
                               weights.structural * r.structural_score;
            results.push_back(std::move(r));
        }
    }

    // Higher score first; ties go to the more recent window.
    std::stable_sort(results.begin(), results.end(),
                     [](const RetrievalResult& a, const RetrievalResult& b) {
                         if (a.combined_score != b.combined_score)
                             return a.combined_score > b.combined_score;
                         if (a.episode != b.episode) return a.episode > b.episode;
                         return a.window_start > b.window_start;
                     });
    if (static_cast<int>(results.size()) > k) results.resize(k);
    return results;
}

nlohmann::json TrajectoryGraph::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_)
        nodes.push_back({{"kind", to_string(n.kind)},
                         {"payload", n.payload},
                         {"episode", n.episode},
                         {"step", n.step}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : edges_)
        edges.push_back(
            {{"src", e.src}, {"dst", e.dst}, {"relation", to_string(e.relation)}});
    return {{"version", 1},
            {"next_episode", next_episode_},
            {"nodes", nodes},
            {"edges", edges}};
}

TrajectoryGraph TrajectoryGraph::from_json(const nlohmann::json& j) {
    if (j.value("version", 0) != 1)
        throw EngineError("unsupported trajectory store version");
    TrajectoryGraph g;
    g.next_episode_ = j.value("next_episode", 0);
    for (const auto& n : j.at("nodes")) {
        MemoryNode node;
        node.kind = kind_from_string(n.at("kind").get<std::string>());
        node.payload = n.at("payload").get<std::set<std::string>>();
        node.episode = n.at("episode").get<int>();
        node.step = n.at("step").get<int>();
        g.nodes_.push_back(std::move(node));
    }
    for (const auto& e : j.at("edges")) {
        MemoryEdge edge;
        edge.src = e.at("src").get<std::size_t>();
        edge.dst = e.at("dst").get<std::size_t>();
        edge.relation = relation_from_string(e.at("relation").get<std::string>());
        if (edge.src >= g.nodes_.size() || edge.dst >= g.nodes_.size())
            throw EngineError("trajectory edge references missing node");
        g.edges_.push_back(edge);
    }
    return g;
}

void TrajectoryGraph::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw EngineError("cannot write trajectory store: " + path);
    out << to_json().dump(2) << "\n";
}

TrajectoryGraph TrajectoryGraph::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EngineError("cannot read trajectory store: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

}  // namespace hecg
