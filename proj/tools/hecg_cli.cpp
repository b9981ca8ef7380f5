#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hecg/harness.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    bool fallback_stub = false;
    std::string memory_in, memory_out, out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config JSON")
        ->required();
    cmd->add_option("--seed", flags.seed, "base seed (overrides config seeds)");
    cmd->add_option("--jobs", flags.jobs, "parallel episode bound");
    cmd->add_flag("--fallback-stub", flags.fallback_stub,
                  "fall back to the deterministic stub when HTTP fails");
    cmd->add_option("--memory-in", flags.memory_in, "trajectory store to load");
    cmd->add_option("--memory-out", flags.memory_out, "trajectory store to save");
    cmd->add_option("--out", flags.out_dir, "output directory");
}

hecg::ExperimentConfig load_config(const CommonFlags& flags) {
    hecg::ExperimentConfig config = hecg::ExperimentConfig::load(flags.config_path);
    if (flags.seed) {
        config.seeds.clear();
        for (int i = 0; i < config.repetitions; ++i)
            config.seeds.push_back(*flags.seed + static_cast<std::uint64_t>(i));
    }
    if (flags.jobs) config.jobs = *flags.jobs;
    if (flags.fallback_stub) config.fallback_stub = true;
    if (!flags.memory_in.empty()) config.memory_in = flags.memory_in;
    if (!flags.memory_out.empty()) config.memory_out = flags.memory_out;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical error-corrective graph runner"};
    app.require_subcommand(1);

    CommonFlags run_flags, ablate_flags, sweep_flags;
    std::string report_dir;
    std::vector<std::string> validate_paths;

    CLI::App* run = app.add_subcommand("run", "execute a scenario batch");
    add_common(run, run_flags);
    CLI::App* ablate =
        app.add_subcommand("ablate", "compare policy coefficient variants");
    add_common(ablate, ablate_flags);
    CLI::App* sweep =
        app.add_subcommand("sweep", "sweep threshold scaling factors");
    add_common(sweep, sweep_flags);
    CLI::App* report =
        app.add_subcommand("report", "recompute metrics from trajectory logs");
    report->add_option("logs", report_dir, "directory of episode logs")
        ->required();
    CLI::App* validate =
        app.add_subcommand("validate", "check scenarios and their graphs");
    validate->add_option("scenarios", validate_paths, "scenario JSON paths")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return hecg::cmd_run(load_config(run_flags)).exit_code;
        if (ablate->parsed())
            return hecg::cmd_ablate(load_config(ablate_flags)).exit_code;
        if (sweep->parsed())
            return hecg::cmd_sweep(load_config(sweep_flags)).exit_code;
        if (report->parsed()) {
            std::cout << hecg::cmd_report(report_dir).to_table();
            return 0;
        }
        if (validate->parsed())
            return hecg::cmd_validate(validate_paths, std::cout);
    } catch (const hecg::EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
