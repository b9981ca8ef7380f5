#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hecg/env.hpp"
#include "hecg/history.hpp"

namespace hecg {

enum class MemoryKind { State, Action, Outcome };
enum class MemoryRelation { Temporal, Causes, Enables, RecoversFrom };

const char* to_string(MemoryKind k);
const char* to_string(MemoryRelation r);

struct MemoryNode {
    MemoryKind kind = MemoryKind::State;
    std::set<std::string> payload;  // predicate or verb+arg tokens
    int episode = 0;
    int step = 0;
};

struct MemoryEdge {
    std::size_t src = 0;  // index into TrajectoryGraph::nodes
    std::size_t dst = 0;
    MemoryRelation relation = MemoryRelation::Temporal;
};

struct RetrievalQuery {
    std::set<std::string> goal_tokens;
    std::set<std::string> current_predicates;
    std::vector<std::string> recent_actions;  // verb sequence, oldest first
};

struct RetrievalWeights {
    double semantic = 0.5;    // w_s
    double structural = 0.5;  // w_t; w_s + w_t = 1
};

struct RetrievalResult {
    int episode = 0;
    int window_start = 0;  // first step of the matched window
    int window_end = 0;    // inclusive
    std::vector<std::size_t> node_refs;
    double semantic_score = 0.0;
    double structural_score = 0.0;
    double combined_score = 0.0;
    // Provenance extracted from the window.
    std::vector<std::string> candidate_actions;
    std::vector<std::string> failure_modes;
    std::vector<std::string> recovery_patterns;  // correction action verbs
};

class TrajectoryGraph {
public:
    static constexpr int kWindowSteps = 5;

    // Stores one State/Action/Outcome triple per step with temporal, causal,
    // enabling, and recovery edges. Returns the number of nodes added.
    int ingest(const EpisodeHistory& history, const PredicateSet& goals);

    // Top-k windows ranked by combined semantic (Jaccard) + structural (LCS
    // over verb sequences) score; ties broken by recency.
    std::vector<RetrievalResult> retrieve(const RetrievalQuery& query, int k,
                                          const RetrievalWeights& weights = {}) const;

    const std::vector<MemoryNode>& nodes() const { return nodes_; }
    const std::vector<MemoryEdge>& edges() const { return edges_; }
    std::size_t size() const { return nodes_.size(); }

    nlohmann::json to_json() const;
    static TrajectoryGraph from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static TrajectoryGraph load(const std::string& path);

private:
    std::vector<MemoryNode> nodes_;
    std::vector<MemoryEdge> edges_;
    int next_episode_ = 0;
};

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
// Longest-common-subsequence length ratio: lcs / max(|a|, |b|), 0 when both empty.
double lcs_ratio(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace hecg
