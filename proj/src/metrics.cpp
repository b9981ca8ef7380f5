#include "hecg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hecg {

const char* error_family(ErrorType type) {
    switch (type) {
        case ErrorType::ActionExecution:
        case ErrorType::SensorFailure:
        case ErrorType::PerceptionMismatch:
            return "grounding";
        case ErrorType::CascadingExecution:
        case ErrorType::AgentPositioning:
            return "precondition";
        case ErrorType::ActionNameMismatch:
        case ErrorType::ScriptParsing:
            return "affordance";
        case ErrorType::CollisionDetected:
        case ErrorType::Timeout:
        case ErrorType::HardwareFault:
            return "execution";
    }
    return "execution";
}

PredicateSet state_predicates(const WorldState& state) {
    PredicateSet out;
    out.insert("agent_in(" + state.agent.room + ")");
    if (state.agent.pose_ok) out.insert("pose_ok(agent)");
    if (state.agent.intact) out.insert("intact(agent)");
    out.insert(state.agent.sitting ? "sitting(agent)" : "standing(agent)");
    for (const auto& h : state.agent.holdings) out.insert("grabbed(" + h + ")");
    for (const auto& [name, o] : state.objects) {
        out.insert("in_room(" + name + "," + o.room + ")");
        for (const auto& p : o.predicates) {
            auto open = p.find('(');
            if (open == std::string::npos) {
                out.insert(p + "(" + name + ")");
            } else {
                auto close = p.rfind(')');
                out.insert(p.substr(0, open) + "(" + name + "," +
                           p.substr(open + 1, close - open - 1) + ")");
            }
        }
    }
    return out;
}

namespace {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / xs.size();
}

std::vector<std::string> primary_actions(const EpisodeResult& r) {
    std::vector<std::string> out;
    for (const auto& rec : r.history.records)
        if (!rec.level) out.push_back(rec.action);
    return out;
}

}  // namespace

MetricReport plan_metrics(const std::vector<EpisodeResult>& results,
                          const std::optional<std::vector<ActionScript>>& reference,
                          int optimal_len) {
    MetricReport m;
    if (results.empty()) return m;
    const double n = static_cast<double>(results.size());

    int successes = 0, successes_no_replan = 0;
    std::vector<double> ratios, efficiencies, accuracies, recoveries;
    for (const auto& r : results) {
        if (r.status == EpisodeStatus::Success) {
            ++successes;
            if (r.replans == 0) ++successes_no_replan;
        }
        ratios.push_back(r.goal_ratio);
        recoveries.push_back(static_cast<double>(r.correction_steps));
        if (optimal_len >= 1 && r.steps > 0)
            efficiencies.push_back(
                std::min(1.0, static_cast<double>(optimal_len) / r.steps));
        if (reference) {
            std::vector<std::string> executed = primary_actions(r);
            std::size_t matches = 0;
            for (std::size_t i = 0;
                 i < std::min(executed.size(), reference->size()); ++i)
                if (executed[i] == (*reference)[i].text()) ++matches;
            accuracies.push_back(executed.empty()
                                     ? 0.0
                                     : static_cast<double>(matches) / executed.size());
        }
    }

    m.sr_final = successes / n;
    m.improvement = (successes - successes_no_replan) / n;
    if (reference) m.action_accuracy = mean(accuracies);
    if (!efficiencies.empty()) m.efficiency = mean(efficiencies);
    m.mean_recovery_steps = mean(recoveries);

    double mu = mean(ratios);
    if (mu > 0.0) {
        double var = 0.0;
        for (double x : ratios) var += (x - mu) * (x - mu);
        m.cv = std::sqrt(var / ratios.size()) / mu;
    }
    m.regimes = regime_distribution(results);
    return m;
}

MetricReport tsr_suite(const std::vector<TaskGroup>& groups) {
    MetricReport m;
    std::vector<double> ratios;
    double replan_sum = 0.0;
    int failed_execs = 0;
    int recovery_needed_successes = 0;   // succeeded after >=1 failure
    int corrective_only_successes = 0;   // ... without any replan
    std::map<std::string, int> type_counts;
    std::map<std::string, int> family_counts;
    int total_errors = 0;

    for (const auto& g : groups) {
        for (const auto& r : g.results) {
            ratios.push_back(r.goal_ratio);
            bool failed_once = !r.history.failures.empty();
            if (failed_once) {
                ++failed_execs;
                // Executions that never replanned contribute zero.
                replan_sum += r.replans > 0 ? r.goal_ratio : 0.0;
                if (r.status == EpisodeStatus::Success) {
                    ++recovery_needed_successes;
                    if (r.replans == 0) ++corrective_only_successes;
                }
            }
            for (const auto& f : r.history.failures) {
                ++type_counts[to_string(f.error)];
                ++family_counts[error_family(f.error)];
                ++total_errors;
            }
        }
    }

    if (!ratios.empty()) m.tsr = mean(ratios);
    m.tsr_r_sum = replan_sum;
    m.tsr_r_mean = failed_execs > 0 ? replan_sum / failed_execs : 0.0;
    if (recovery_needed_successes > 0)
        m.tsr_c = static_cast<double>(corrective_only_successes) /
                  recovery_needed_successes;
    for (const auto& [type, count] : type_counts)
        m.error_type_ratio[type] = static_cast<double>(count) / total_errors;
    for (const auto& [family, count] : family_counts)
        m.error_family_ratio[family] = static_cast<double>(count) / total_errors;
    return m;
}

MetricReport compliance_metrics(const WorldState& initial,
                                const WorldState& final_state,
                                const std::map<Predicate, double>& weighted_goals,
                                int executed_len, int optimal_len) {
    MetricReport m;
    if (weighted_goals.empty()) return m;

    double weight_total = 0.0, weight_satisfied = 0.0;
    int satisfied = 0;
    for (const auto& [goal, weight] : weighted_goals) {
        weight_total += weight;
        if (final_state.satisfies(goal)) {
            ++satisfied;
            weight_satisfied += weight;
        }
    }
    m.goal_compliance = static_cast<double>(satisfied) / weighted_goals.size();
    m.soft_recall = weight_total > 0 ? weight_satisfied / weight_total : 0.0;

    // Precision convention: share of state changes that touch a goal predicate.
    PredicateSet before = state_predicates(initial);
    PredicateSet after = state_predicates(final_state);
    PredicateSet changes;
    for (const auto& p : after)
        if (!before.count(p)) changes.insert(p);
    for (const auto& p : before)
        if (!after.count(p)) changes.insert(p);
    if (changes.empty()) {
        m.soft_precision = 1.0;
    } else {
        int relevant = 0;
        for (const auto& p : changes)
            if (weighted_goals.count(p)) ++relevant;
        m.soft_precision = static_cast<double>(relevant) / changes.size();
    }

    double r = *m.soft_recall, p = *m.soft_precision;
    m.soft_f1 = (r + p) > 0 ? 2 * r * p / (r + p) : 0.0;
    m.size_penalty =
        executed_len > 0
            ? std::min(1.0, static_cast<double>(optimal_len) / executed_len)
            : 1.0;
    m.final_score = *m.soft_f1 * *m.size_penalty;
    return m;
}

RegimeDistribution regime_distribution(const std::vector<EpisodeResult>& results) {
    RegimeDistribution d;
    for (const auto& r : results) {
        for (const auto& rec : r.history.records) {
            const char* regime = rec.error_value <= rec.local_threshold ? "low"
                                 : rec.error_value <= rec.max_threshold
                                     ? "moderate"
                                     : "high";
            ++d.count[regime][to_string(rec.edge_kind)];
        }
    }
    for (const auto& [regime, kinds] : d.count) {
        int total = 0;
        for (const auto& [kind, c] : kinds) total += c;
        for (const auto& [kind, c] : kinds)
            d.share[regime][kind] = static_cast<double>(c) / total;
    }
    return d;
}

void MetricReport::merge(const MetricReport& other) {
    auto take = [](std::optional<double>& mine, const std::optional<double>& theirs) {
        if (theirs) mine = theirs;
    };
    take(sr_final, other.sr_final);
    take(action_accuracy, other.action_accuracy);
    take(efficiency, other.efficiency);
    take(cv, other.cv);
    take(improvement, other.improvement);
    take(tsr, other.tsr);
    take(tsr_r_sum, other.tsr_r_sum);
    take(tsr_r_mean, other.tsr_r_mean);
    take(tsr_c, other.tsr_c);
    take(goal_compliance, other.goal_compliance);
    take(soft_recall, other.soft_recall);
    take(soft_precision, other.soft_precision);
    take(soft_f1, other.soft_f1);
    take(size_penalty, other.size_penalty);
    take(final_score, other.final_score);
    take(mean_recovery_steps, other.mean_recovery_steps);
    if (!other.error_type_ratio.empty()) error_type_ratio = other.error_type_ratio;
    if (!other.error_family_ratio.empty())
        error_family_ratio = other.error_family_ratio;
    if (!other.regimes.count.empty()) regimes = other.regimes;
}

namespace {

struct Row {
    const char* name;
    const std::optional<double>* value;
    bool convention;
};

std::vector<Row> rows_of(const MetricReport& m) {
    return {{"sr_final", &m.sr_final, false},
            {"action_accuracy", &m.action_accuracy, false},
            {"efficiency", &m.efficiency, false},
            {"cv", &m.cv, false},
            {"improvement", &m.improvement, false},
            {"tsr", &m.tsr, false},
            {"tsr_r_sum", &m.tsr_r_sum, false},
            {"tsr_r_mean", &m.tsr_r_mean, false},
            {"tsr_c", &m.tsr_c, false},
            {"goal_compliance", &m.goal_compliance, false},
            {"soft_recall", &m.soft_recall, false},
            {"soft_precision", &m.soft_precision, true},
            {"soft_f1", &m.soft_f1, false},
            {"size_penalty", &m.size_penalty, false},
            {"final_score", &m.final_score, true},
            {"mean_recovery_steps", &m.mean_recovery_steps, false}};
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& row : rows_of(*this))
        if (*row.value) j[row.name] = **row.value;
    if (!error_type_ratio.empty()) j["error_type_ratio"] = error_type_ratio;
    if (!error_family_ratio.empty()) j["error_family_ratio"] = error_family_ratio;
    if (!regimes.count.empty()) {
        nlohmann::json reg = nlohmann::json::object();
        for (const auto& [regime, kinds] : regimes.share) {
            reg[regime] = {{"share", kinds}, {"count", regimes.count.at(regime)}};
        }
        j["regimes"] = reg;
    }
    return j;
}

std::string MetricReport::to_table() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    for (const auto& row : rows_of(*this)) {
        if (!*row.value) continue;
        out << std::left << std::setw(22) << row.name << std::right
            << std::setw(10) << **row.value;
        if (row.convention) out << "  (convention)";
        out << "\n";
    }
    for (const auto& [type, ratio] : error_type_ratio)
        out << std::left << std::setw(30) << ("error " + type) << std::right
            << std::setw(10) << ratio << "\n";
    for (const auto& [family, ratio] : error_family_ratio)
        out << std::left << std::setw(30) << ("family " + family) << std::right
            << std::setw(10) << ratio << "\n";
    for (const auto& [regime, kinds] : regimes.share) {
        out << "regime " << regime << ":";
        for (const auto& [kind, share] : kinds)
            out << "  " << kind << " " << share;
        out << "\n";
    }
    return out.str();
}

std::string MetricReport::to_csv() const {
    std::ostringstream names, values;
    bool first = true;
    auto emit = [&](const std::string& name, double v) {
        if (!first) {
            names << ",";
            values << ",";
        }
        first = false;
        names << name;
        values << v;
    };
    for (const auto& row : rows_of(*this))
        if (*row.value) emit(row.name, **row.value);
    for (const auto& [type, ratio] : error_type_ratio) emit("error:" + type, ratio);
    for (const auto& [family, ratio] : error_family_ratio)
        emit("family:" + family, ratio);
    for (const auto& [regime, kinds] : regimes.share)
        for (const auto& [kind, share] : kinds)
            emit("regime:" + std::string(regime) + ":" + kind, share);
    return names.str() + "\n" + values.str() + "\n";
}

}  // namespace hecg
