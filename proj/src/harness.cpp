#include "hecg/harness.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace hecg {

const char* to_string(AblationVariant v) {
    switch (v) {
        case AblationVariant::Full: return "full";
        case AblationVariant::NoValue: return "no_value";
        case AblationVariant::NoCost: return "no_cost";
        case AblationVariant::NoRisk: return "no_risk";
        case AblationVariant::NoLlm: return "no_llm";
    }
    return "full";
}

AblationVariant ablation_from_string(const std::string& s) {
    if (s == "full") return AblationVariant::Full;
    if (s == "no_value") return AblationVariant::NoValue;
    if (s == "no_cost") return AblationVariant::NoCost;
    if (s == "no_risk") return AblationVariant::NoRisk;
    if (s == "no_llm") return AblationVariant::NoLlm;
    throw ConfigError("unknown ablation variant: " + s);
}

PolicyCoefficients apply_variant(PolicyCoefficients coeffs, AblationVariant v) {
    switch (v) {
        case AblationVariant::Full: break;
        case AblationVariant::NoValue: coeffs.alpha = 0.0; break;
        case AblationVariant::NoCost: coeffs.beta = 0.0; break;
        case AblationVariant::NoRisk: coeffs.gamma = 0.0; break;
        case AblationVariant::NoLlm: coeffs.lambda = 0.0; break;
    }
    return coeffs;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig c;
        c.scenario_paths =
            j.value("scenarios", std::vector<std::string>{});
        if (j.contains("policy")) c.policy = PolicyConfig::from_json(j.at("policy"));
        if (j.contains("variants")) {
            c.variants.clear();
            for (const auto& v : j.at("variants"))
                c.variants.push_back(ablation_from_string(v.get<std::string>()));
        }
        c.epsilon_scales = j.value("epsilon_scales", std::vector<double>{});
        for (double s : c.epsilon_scales)
            if (s <= 0.0) throw ConfigError("epsilon scales must be positive");
        c.repetitions = j.value("repetitions", 1);
        c.seeds = j.value("seeds", std::vector<std::uint64_t>{});
        c.planner = j.value("planner", std::string("stub"));
        c.scorer = j.value("scorer", std::string("stub"));
        if (j.contains("http")) {
            const auto& h = j.at("http");
            c.http.endpoint = h.value("endpoint", std::string{});
            c.http.path = h.value("path", c.http.path);
            c.http.model = h.value("model", std::string{});
            c.http.auth_env_var = h.value("auth_env_var", std::string{});
            c.http.plan_template_path = h.value("plan_template", std::string{});
            c.http.score_template_path = h.value("score_template", std::string{});
            c.http.temperature = h.value("temperature", 0.0);
            c.http.max_retries = h.value("max_retries", 3);
            c.http.timeout_seconds = h.value("timeout_seconds", 30);
            c.http.fallback_stub = h.value("fallback_stub", false);
        }
        c.fallback_stub = j.value("fallback_stub", false);
        c.memory_in = j.value("memory_in", std::string{});
        c.memory_out = j.value("memory_out", std::string{});
        c.out_dir = j.value("out_dir", std::string("out"));
        c.jobs = j.value("jobs", 1);
        c.budgets.l1_per_node = j.value("l1_per_node", 2);
        c.budgets.replans_per_episode = j.value("replans_per_episode", 2);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    std::vector<std::string> variant_names;
    for (auto v : variants) variant_names.push_back(to_string(v));
    return {{"scenarios", scenario_paths},
            {"policy", policy.to_json()},
            {"variants", variant_names},
            {"epsilon_scales", epsilon_scales},
            {"repetitions", repetitions},
            {"seeds", seeds},
            {"planner", planner},
            {"scorer", scorer},
            {"http",
             {{"endpoint", http.endpoint},
              {"path", http.path},
              {"model", http.model},
              {"auth_env_var", http.auth_env_var},
              {"plan_template", http.plan_template_path},
              {"score_template", http.score_template_path},
              {"temperature", http.temperature},
              {"max_retries", http.max_retries},
              {"timeout_seconds", http.timeout_seconds},
              {"fallback_stub", http.fallback_stub}}},
            {"fallback_stub", fallback_stub},
            {"memory_in", memory_in},
            {"memory_out", memory_out},
            {"out_dir", out_dir},
            {"jobs", jobs},
            {"l1_per_node", budgets.l1_per_node},
            {"replans_per_episode", budgets.replans_per_episode}};
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
    // FNV-1a over the canonical JSON dump.
    std::string dump = config.to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

TaskGraph scale_thresholds(TaskGraph graph, double scale) {
    for (auto& [id, node] : graph.nodes) {
        (void)id;
        node.local_threshold =
            std::clamp(node.local_threshold * scale, 0.0, 1.0);
        node.max_threshold = std::clamp(node.max_threshold * scale, 0.0, 1.0);
        if (node.local_threshold > node.max_threshold)
            node.local_threshold = node.max_threshold;
    }
    return graph;
}

namespace {

nlohmann::json episode_to_json(const Scenario& scenario,
                               const EpisodeResult& r) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : r.history.records) {
        nlohmann::json e = {{"step", rec.step},
                            {"node", rec.node},
                            {"action", rec.action},
                            {"kind", to_string(rec.edge_kind)},
                            {"error", rec.error_value},
                            {"local_threshold", rec.local_threshold},
                            {"max_threshold", rec.max_threshold},
                            {"succeeded", rec.succeeded},
                            {"message", rec.message}};
        if (rec.error_type) e["error_type"] = to_string(*rec.error_type);
        if (rec.level) e["level"] = to_string(*rec.level);
        records.push_back(std::move(e));
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : r.history.failures) {
        nlohmann::json e = {{"node", f.node},
                            {"action", f.action.text()},
                            {"error", to_string(f.error)},
                            {"step", f.step},
                            {"room", f.room},
                            {"recovered", f.recovered}};
        nlohmann::json levels = nlohmann::json::array();
        for (auto l : f.attempted_levels) levels.push_back(to_string(l));
        e["attempted_levels"] = levels;
        failures.push_back(std::move(e));
    }
    return {{"scene", scenario.scene},
            {"seed", scenario.seed},
            {"plan_length", scenario.plan.size()},
            {"status", to_string(r.status)},
            {"steps", r.steps},
            {"correction_steps", r.correction_steps},
            {"replans", r.replans},
            {"goal_ratio", r.goal_ratio},
            {"records", records},
            {"failures", failures}};
}

EpisodeResult episode_from_json(const nlohmann::json& j, std::string* scene,
                                int* plan_length) {
    EpisodeResult r;
    *scene = j.value("scene", std::string{});
    *plan_length = j.value("plan_length", 0);
    std::string status = j.value("status", std::string("failed"));
    if (status == "success") r.status = EpisodeStatus::Success;
    else if (status == "escalated") r.status = EpisodeStatus::Escalated;
    else if (status == "step_limit") r.status = EpisodeStatus::StepLimit;
    else r.status = EpisodeStatus::Failed;
    r.steps = j.value("steps", 0);
    r.correction_steps = j.value("correction_steps", 0);
    r.replans = j.value("replans", 0);
    r.goal_ratio = j.value("goal_ratio", 0.0);
    for (const auto& e : j.value("records", nlohmann::json::array())) {
        StepRecord rec;
        rec.step = e.value("step", 0);
        rec.node = e.value("node", std::string{});
        rec.action = e.value("action", std::string{});
        rec.edge_kind = edge_kind_from_string(e.value("kind", std::string("Main")));
        rec.error_value = e.value("error", 0.0);
        rec.local_threshold = e.value("local_threshold", 0.25);
        rec.max_threshold = e.value("max_threshold", 0.75);
        rec.succeeded = e.value("succeeded", true);
        rec.message = e.value("message", std::string{});
        if (e.contains("error_type"))
            rec.error_type =
                error_type_from_string(e.at("error_type").get<std::string>());
        if (e.contains("level")) {
            std::string l = e.at("level").get<std::string>();
            rec.level = l == "L1"   ? CorrectionLevel::L1
                        : l == "L2" ? CorrectionLevel::L2
                        : l == "L3" ? CorrectionLevel::L3
                                    : CorrectionLevel::L4;
        }
        r.history.records.push_back(std::move(rec));
    }
    for (const auto& e : j.value("failures", nlohmann::json::array())) {
        FailureRecord f;
        f.node = e.value("node", std::string{});
        f.error = error_type_from_string(e.value("error", std::string{}));
        f.step = e.value("step", 0);
        f.room = e.value("room", std::string{});
        f.recovered = e.value("recovered", false);
        r.history.failures.push_back(std::move(f));
    }
    return r;
}

struct Backends {
    std::unique_ptr<Planner> planner;
    std::unique_ptr<SemanticScorer> scorer;
};

Backends make_backends(const ExperimentConfig& config) {
    Backends b;
    HttpConfig http = config.http;
    if (config.fallback_stub) http.fallback_stub = true;
    if (config.planner == "http")
        b.planner = std::make_unique<HttpPlanner>(http);
    else
        b.planner = std::make_unique<StubPlanner>();
    if (config.scorer == "http")
        b.scorer = std::make_unique<HttpScorer>(http);
    else
        b.scorer = std::make_unique<StubScorer>();
    return b;
}

std::vector<std::uint64_t> effective_seeds(const ExperimentConfig& config) {
    std::vector<std::uint64_t> seeds = config.seeds;
    for (std::uint64_t i = seeds.size();
         i < static_cast<std::uint64_t>(config.repetitions); ++i)
        seeds.push_back(i + 1);
    seeds.resize(config.repetitions);
    return seeds;
}

struct BatchOutcome {
    std::vector<Scenario> scenarios;
    std::vector<EpisodeResult> results;  // (scenario, repetition) order
    MetricReport report;
};

MetricReport assemble_report(const std::vector<Scenario>& scenarios,
                             const std::vector<EpisodeResult>& results,
                             int repetitions) {
    std::vector<TaskGroup> groups;
    std::vector<double> efficiencies;
    MetricReport aggregate;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        TaskGroup g;
        g.task = scenarios[s].scene;
        for (int rep = 0; rep < repetitions; ++rep)
            g.results.push_back(results[s * repetitions + rep]);
        MetricReport per = plan_metrics(
            g.results, std::nullopt, static_cast<int>(scenarios[s].plan.size()));
        if (per.efficiency) efficiencies.push_back(*per.efficiency);
        groups.push_back(std::move(g));
    }
    aggregate = plan_metrics(results, std::nullopt, 0);
    if (!efficiencies.empty()) {
        double sum = 0.0;
        for (double e : efficiencies) sum += e;
        aggregate.efficiency = sum / efficiencies.size();
    }
    aggregate.merge(tsr_suite(groups));
    aggregate.regimes = regime_distribution(results);
    return aggregate;
}

BatchOutcome execute(const ExperimentConfig& config,
                     const PolicyCoefficients& coeffs, double scale,
                     TrajectoryGraph* memory) {
    BatchOutcome out;
    for (const auto& path : config.scenario_paths) {
        Scenario s = Scenario::load(path);
        s.thresholds.default_local =
            std::clamp(s.thresholds.default_local * scale, 0.0, 1.0);
        s.thresholds.default_max =
            std::clamp(s.thresholds.default_max * scale, 0.0, 1.0);
        if (s.thresholds.default_local > s.thresholds.default_max)
            s.thresholds.default_local = s.thresholds.default_max;
        for (auto& [step, pair] : s.thresholds.per_step) {
            (void)step;
            pair.first = std::clamp(pair.first * scale, 0.0, 1.0);
            pair.second = std::clamp(pair.second * scale, 0.0, 1.0);
            if (pair.first > pair.second) pair.first = pair.second;
        }
        out.scenarios.push_back(std::move(s));
    }

    Backends backends = make_backends(config);
    BatchConfig batch;
    batch.coeffs = coeffs;
    batch.run.budgets = config.budgets;
    batch.run.verb_risk = config.policy.verb_risk;
    out.results = run_batch(out.scenarios, batch, config.repetitions,
                            effective_seeds(config), *backends.planner,
                            *backends.scorer, memory);
    out.report = assemble_report(out.scenarios, out.results, config.repetitions);
    return out;
}

int status_exit_code(const std::vector<EpisodeResult>& results) {
    for (const auto& r : results)
        if (r.status != EpisodeStatus::Success) return 1;
    return 0;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

}  // namespace

RunArtifacts cmd_run(const ExperimentConfig& config) {
    RunArtifacts art;
    try {
        std::unique_ptr<TrajectoryGraph> memory;
        if (!config.memory_in.empty())
            memory = std::make_unique<TrajectoryGraph>(
                TrajectoryGraph::load(config.memory_in));
        else if (!config.memory_out.empty())
            memory = std::make_unique<TrajectoryGraph>();

        BatchOutcome batch = execute(config, config.policy.coeffs,
                                     config.policy.epsilon_scale, memory.get());

        fs::create_directories(fs::path(config.out_dir) / "logs");
        for (std::size_t s = 0; s < batch.scenarios.size(); ++s) {
            for (int rep = 0; rep < config.repetitions; ++rep) {
                const EpisodeResult& r =
                    batch.results[s * config.repetitions + rep];
                fs::path p = fs::path(config.out_dir) / "logs" /
                             ("episode_" + std::to_string(s) + "_" +
                              std::to_string(rep) + ".json");
                write_text(p, episode_to_json(batch.scenarios[s], r).dump(2) + "\n");
            }
        }

        art.report = batch.report;
        art.results = std::move(batch.results);
        art.report_path = (fs::path(config.out_dir) / "report.json").string();
        write_text(art.report_path, art.report.to_json().dump(2) + "\n");
        write_text(fs::path(config.out_dir) / "report.txt", art.report.to_table());
        write_text(fs::path(config.out_dir) / "report.csv", art.report.to_csv());

        nlohmann::json manifest = {{"config_hash", config_hash(config)},
                                   {"seeds", effective_seeds(config)},
                                   {"config", config.to_json()},
                                   {"format_version", 1}};
        art.manifest_path = (fs::path(config.out_dir) / "manifest.json").string();
        write_text(art.manifest_path, manifest.dump(2) + "\n");

        if (memory && !config.memory_out.empty()) memory->save(config.memory_out);
        art.exit_code = status_exit_code(art.results);
        return art;
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        art.exit_code = 2;
        return art;
    }
}

AblationArtifacts cmd_ablate(const ExperimentConfig& config) {
    AblationArtifacts art;
    try {
        if (config.variants.size() < 2)
            throw ConfigError("ablation needs at least two variants");
        nlohmann::json rows = nlohmann::json::array();
        std::ostringstream table;
        int worst = 0;
        for (auto variant : config.variants) {
            // Fresh memory per variant keeps inputs identical across variants
            // while still letting each variant learn within its own batch.
            TrajectoryGraph memory;
            BatchOutcome batch =
                execute(config, apply_variant(config.policy.coeffs, variant),
                        config.policy.epsilon_scale, &memory);
            AblationRow row;
            row.variant = variant;
            row.tsr = batch.report.tsr.value_or(0.0);
            row.mean_recovery_steps = batch.report.mean_recovery_steps.value_or(0.0);
            row.regimes = batch.report.regimes;
            worst = std::max(worst, status_exit_code(batch.results));

            nlohmann::json reg = nlohmann::json::object();
            for (const auto& [regime, kinds] : row.regimes.share)
                reg[regime] = kinds;
            rows.push_back({{"variant", to_string(variant)},
                            {"tsr", row.tsr},
                            {"mean_recovery_steps", row.mean_recovery_steps},
                            {"regimes", reg}});
            table << to_string(variant) << "\ttsr " << row.tsr
                  << "\trecovery " << row.mean_recovery_steps << "\n";
            art.rows.push_back(std::move(row));
        }
        fs::create_directories(config.out_dir);
        art.report_path = (fs::path(config.out_dir) / "ablation.json").string();
        write_text(art.report_path,
                   nlohmann::json{{"rows", rows}}.dump(2) + "\n");
        write_text(fs::path(config.out_dir) / "ablation.txt", table.str());
        art.exit_code = worst;
        return art;
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        art.exit_code = 2;
        return art;
    }
}

SweepArtifacts cmd_sweep(const ExperimentConfig& config) {
    SweepArtifacts art;
    try {
        if (config.epsilon_scales.size() < 2)
            throw ConfigError("sweep needs at least two epsilon scales");
        nlohmann::json rows = nlohmann::json::array();
        std::ostringstream csv;
        csv << "scale,tsr,main_share_low\n";
        int worst = 0;
        for (double scale : config.epsilon_scales) {
            BatchOutcome batch =
                execute(config, config.policy.coeffs, scale, nullptr);
            SweepRow row;
            row.scale = scale;
            row.tsr = batch.report.tsr.value_or(0.0);
            auto low = batch.report.regimes.share.find("low");
            if (low != batch.report.regimes.share.end()) {
                auto main = low->second.find("Main");
                if (main != low->second.end()) row.main_share_low = main->second;
            }
            worst = std::max(worst, status_exit_code(batch.results));
            rows.push_back({{"scale", row.scale},
                            {"tsr", row.tsr},
                            {"main_share_low", row.main_share_low}});
            csv << row.scale << "," << row.tsr << "," << row.main_share_low
                << "\n";
            art.rows.push_back(row);
        }
        fs::create_directories(config.out_dir);
        art.report_path = (fs::path(config.out_dir) / "sweep.json").string();
        write_text(art.report_path, nlohmann::json{{"rows", rows}}.dump(2) + "\n");
        write_text(fs::path(config.out_dir) / "sweep.csv", csv.str());
        art.exit_code = worst;
        return art;
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        art.exit_code = 2;
        return art;
    }
}

MetricReport cmd_report(const std::string& log_dir) {
    std::map<std::string, TaskGroup> groups;
    std::vector<EpisodeResult> all;
    std::map<std::string, int> plan_lengths;
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(log_dir))
        if (entry.path().extension() == ".json") paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        std::ifstream in(p);
        nlohmann::json j;
        in >> j;
        std::string scene;
        int plan_length = 0;
        EpisodeResult r = episode_from_json(j, &scene, &plan_length);
        groups[scene].task = scene;
        plan_lengths[scene] = plan_length;
        all.push_back(r);
        groups[scene].results.push_back(std::move(r));
    }

    MetricReport report = plan_metrics(all, std::nullopt, 0);
    std::vector<double> efficiencies;
    std::vector<TaskGroup> group_list;
    for (auto& [scene, g] : groups) {
        MetricReport per =
            plan_metrics(g.results, std::nullopt, plan_lengths[scene]);
        if (per.efficiency) efficiencies.push_back(*per.efficiency);
        group_list.push_back(std::move(g));
    }
    if (!efficiencies.empty()) {
        double sum = 0.0;
        for (double e : efficiencies) sum += e;
        report.efficiency = sum / efficiencies.size();
    }
    report.merge(tsr_suite(group_list));
    report.regimes = regime_distribution(all);
    return report;
}

int cmd_validate(const std::vector<std::string>& scenario_paths,
                 std::ostream& out) {
    int rc = 0;
    for (const auto& path : scenario_paths) {
        try {
            Scenario s = Scenario::load(path);
            TaskGraph g = build_graph(s.plan, s.options, s.thresholds);
            ValidationReport report = validate(g);
            if (report.ok()) {
                out << path << ": ok (" << g.nodes.size() << " nodes, "
                    << g.edges.size() << " edges)\n";
            } else {
                rc = 2;
                for (const auto& issue : report.issues)
                    out << path << ": " << issue.code << ": " << issue.detail
                        << "\n";
            }
        } catch (const EngineError& e) {
            rc = 2;
            out << path << ": " << e.what() << "\n";
        }
    }
    return rc;
}

}  // namespace hecg
