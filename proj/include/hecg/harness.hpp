#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hecg/metrics.hpp"
#include "hecg/planner.hpp"
#include "hecg/traversal.hpp"

namespace hecg {

enum class AblationVariant { Full, NoValue, NoCost, NoRisk, NoLlm };
const char* to_string(AblationVariant v);
AblationVariant ablation_from_string(const std::string& s);
// Zeroes exactly the variant's coefficient (Full zeroes none).
PolicyCoefficients apply_variant(PolicyCoefficients coeffs, AblationVariant v);

struct ExperimentConfig {
    std::vector<std::string> scenario_paths;
    PolicyConfig policy;
    std::vector<AblationVariant> variants = {AblationVariant::Full};
    std::vector<double> epsilon_scales;
    int repetitions = 1;
    std::vector<std::uint64_t> seeds;
    std::string planner = "stub";  // "stub" | "http"
    std::string scorer = "stub";
    HttpConfig http;
    bool fallback_stub = false;
    std::string memory_in;
    std::string memory_out;
    std::string out_dir = "out";
    int jobs = 1;
    CorrectionBudgets budgets;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static ExperimentConfig load(const std::string& path);
};

struct RunArtifacts {
    int exit_code = 0;
    MetricReport report;
    std::vector<EpisodeResult> results;
    std::string manifest_path;
    std::string report_path;
};

// Scales every node threshold pair, clamped to [0,1] with order preserved.
TaskGraph scale_thresholds(TaskGraph graph, double scale);

// run: execute the batch, write trajectory logs, the metric report, and a
// manifest (config hash, seeds, versions) under the output directory.
RunArtifacts cmd_run(const ExperimentConfig& config);

// ablate: each requested variant under identical seeds/scenarios; emits
// per-variant TSR, mean recovery steps, and the regime distribution table.
struct AblationRow {
    AblationVariant variant;
    double tsr = 0.0;
    double mean_recovery_steps = 0.0;
    RegimeDistribution regimes;
};
struct AblationArtifacts {
    int exit_code = 0;
    std::vector<AblationRow> rows;
    std::string report_path;
};
AblationArtifacts cmd_ablate(const ExperimentConfig& config);

// sweep: one run per epsilon scale; TSR-vs-scale table plus CSV.
struct SweepRow {
    double scale = 1.0;
    double tsr = 0.0;
    double main_share_low = 0.0;
};
struct SweepArtifacts {
    int exit_code = 0;
    std::vector<SweepRow> rows;
    std::string report_path;
};
SweepArtifacts cmd_sweep(const ExperimentConfig& config);

// report: recompute the metric report from trajectory logs in a directory.
MetricReport cmd_report(const std::string& log_dir);

// validate: parse scenarios, build their graphs, and report violations.
int cmd_validate(const std::vector<std::string>& scenario_paths, std::ostream& out);

// Stable hash of the config JSON (manifest reproducibility key).
std::string config_hash(const ExperimentConfig& config);

}  // namespace hecg
