#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hecg/harness.hpp"

using namespace hecg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("hecg_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig small_run_config(const std::string& out_dir) {
    ExperimentConfig c;
    c.scenario_paths = {"scenarios/putfridge.json", "scenarios/readbook.json"};
    c.repetitions = 2;
    c.seeds = {11, 12};
    c.out_dir = out_dir;
    return c;
}

}  // namespace

TEST_CASE("ablation variants zero exactly their own coefficient") {
    PolicyCoefficients base;
    base.alpha = 1.0;
    base.beta = 0.5;
    base.gamma = 0.4;
    base.lambda = 0.7;

    auto same_except = [&](const PolicyCoefficients& got, double a, double b,
                           double g, double l) {
        CHECK(got.alpha == doctest::Approx(a));
        CHECK(got.beta == doctest::Approx(b));
        CHECK(got.gamma == doctest::Approx(g));
        CHECK(got.lambda == doctest::Approx(l));
    };
    same_except(apply_variant(base, AblationVariant::Full), 1.0, 0.5, 0.4, 0.7);
    same_except(apply_variant(base, AblationVariant::NoValue), 0.0, 0.5, 0.4, 0.7);
    same_except(apply_variant(base, AblationVariant::NoCost), 1.0, 0.0, 0.4, 0.7);
    same_except(apply_variant(base, AblationVariant::NoRisk), 1.0, 0.5, 0.0, 0.7);
    same_except(apply_variant(base, AblationVariant::NoLlm), 1.0, 0.5, 0.4, 0.0);
}

TEST_CASE("variant names round-trip and unknown names are rejected") {
    for (auto v : {AblationVariant::Full, AblationVariant::NoValue,
                   AblationVariant::NoCost, AblationVariant::NoRisk,
                   AblationVariant::NoLlm})
        CHECK(ablation_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(ablation_from_string("no_everything"), ConfigError);
}

TEST_CASE("the experiment config round-trips through JSON with its defaults") {
    ExperimentConfig c;
    CHECK(c.repetitions == 1);
    CHECK(c.planner == "stub");
    CHECK(c.out_dir == "out");
    CHECK(c.variants == std::vector<AblationVariant>{AblationVariant::Full});

    c.scenario_paths = {"a.json"};
    c.variants = {AblationVariant::Full, AblationVariant::NoRisk};
    c.epsilon_scales = {0.5, 1.0, 2.0};
    c.repetitions = 3;
    c.seeds = {5, 6, 7};
    c.planner = "http";
    c.http.endpoint = "http://example.invalid";
    c.http.model = "m";
    c.memory_out = "mem.json";
    c.budgets.l1_per_node = 5;

    ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.variants == c.variants);
    CHECK(back.budgets.l1_per_node == 5);
}

TEST_CASE("malformed configs surface as config errors") {
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"repetitions", "three"}}),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"epsilon_scales", {0.5, 0.0}}}),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"variants", {"bogus"}}}),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("configs/does_not_exist.json"),
                    ConfigError);
}

TEST_CASE("the config hash is stable under round-trips and sensitive to content") {
    ExperimentConfig c = small_run_config("out/tmp");
    std::string h = config_hash(c);
    CHECK(h == config_hash(ExperimentConfig::from_json(c.to_json())));

    ExperimentConfig other = c;
    other.repetitions = 3;
    CHECK(config_hash(other) != h);
}

TEST_CASE("threshold scaling clamps to the unit interval and keeps the order") {
    std::vector<ActionScript> plan = {parse_script("[walk] <kitchen>"),
                                      parse_script("[grab] <bananas>")};
    ThresholdConfig t;
    t.per_step[1] = {0.6, 0.7};
    TaskGraph g = build_graph(plan, {}, t);

    TaskGraph doubled = scale_thresholds(g, 2.0);
    // 0.6 * 2 and 0.7 * 2 both clamp to 1.0; the order stays intact.
    CHECK(doubled.node("a1").local_threshold == doctest::Approx(1.0));
    CHECK(doubled.node("a1").max_threshold == doctest::Approx(1.0));
    CHECK(doubled.node("a2").local_threshold == doctest::Approx(0.5));
    CHECK(doubled.node("a2").max_threshold == doctest::Approx(1.0));

    TaskGraph halved = scale_thresholds(g, 0.5);
    CHECK(halved.node("a1").local_threshold == doctest::Approx(0.3));
    CHECK(halved.node("a1").max_threshold == doctest::Approx(0.35));
    CHECK(halved.node("a2").local_threshold == doctest::Approx(0.125));
    CHECK(halved.node("a2").max_threshold == doctest::Approx(0.375));
    CHECK(validate(halved).ok());
}

TEST_CASE("cmd_run writes logs, reports, and a manifest for every episode") {
    TempDir dir("run");
    ExperimentConfig c = small_run_config(dir.str());
    RunArtifacts art = cmd_run(c);
    CHECK(art.exit_code == 0);
    REQUIRE(art.results.size() == 4);  // 2 scenarios x 2 repetitions
    for (const auto& r : art.results) CHECK(r.status == EpisodeStatus::Success);
    CHECK(art.report.sr_final == doctest::Approx(1.0));
    CHECK(art.report.tsr.value_or(0.0) == doctest::Approx(1.0));

    for (int s = 0; s < 2; ++s)
        for (int rep = 0; rep < 2; ++rep)
            CHECK(fs::exists(dir.path / "logs" /
                             ("episode_" + std::to_string(s) + "_" +
                              std::to_string(rep) + ".json")));
    CHECK(fs::exists(dir.path / "report.json"));
    CHECK(fs::exists(dir.path / "report.txt"));
    CHECK(fs::exists(dir.path / "report.csv"));

    nlohmann::json manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
    CHECK(manifest.at("config_hash") == config_hash(c));
    CHECK(manifest.at("seeds") == nlohmann::json(std::vector<std::uint64_t>{11, 12}));
    CHECK(ExperimentConfig::from_json(manifest.at("config")).to_json() == c.to_json());

    nlohmann::json report = nlohmann::json::parse(slurp(dir.path / "report.json"));
    CHECK(report == art.report.to_json());
}

TEST_CASE("cmd_run pads missing seeds with the repetition index") {
    TempDir dir("seedfill");
    ExperimentConfig c = small_run_config(dir.str());
    c.seeds.clear();  // default fill is 1..repetitions
    RunArtifacts art = cmd_run(c);
    CHECK(art.exit_code == 0);
    nlohmann::json manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
    CHECK(manifest.at("seeds") == nlohmann::json(std::vector<std::uint64_t>{1, 2}));
}

TEST_CASE("cmd_run reports configuration problems with exit code 2") {
    TempDir dir("badrun");
    ExperimentConfig c = small_run_config(dir.str());
    c.scenario_paths = {"scenarios/no_such_scene.json"};
    RunArtifacts art = cmd_run(c);
    CHECK(art.exit_code == 2);
    CHECK(!fs::exists(dir.path / "report.json"));
}

TEST_CASE("repeated runs of the same config produce identical artifacts") {
    TempDir a("det_a"), b("det_b");
    ExperimentConfig ca = small_run_config(a.str());
    ExperimentConfig cb = small_run_config(b.str());
    cmd_run(ca);
    cmd_run(cb);
    CHECK(slurp(a.path / "report.json") == slurp(b.path / "report.json"));
    for (int s = 0; s < 2; ++s)
        for (int rep = 0; rep < 2; ++rep) {
            std::string name = "episode_" + std::to_string(s) + "_" +
                               std::to_string(rep) + ".json";
            CHECK(slurp(a.path / "logs" / name) == slurp(b.path / "logs" / name));
        }
}

TEST_CASE("cmd_report rebuilds the metric report from the trajectory logs") {
    TempDir dir("report");
    ExperimentConfig c = small_run_config(dir.str());
    c.scenario_paths.push_back("scenarios/faults_putfridge.json");
    RunArtifacts art = cmd_run(c);
    MetricReport rebuilt = cmd_report((dir.path / "logs").string());
    CHECK(rebuilt.to_json() == art.report.to_json());
}

TEST_CASE("cmd_run can persist and reload the trajectory memory") {
    TempDir dir("memory");
    ExperimentConfig c = small_run_config(dir.str());
    c.memory_out = (dir.path / "memory.json").string();
    cmd_run(c);
    TrajectoryGraph memory = TrajectoryGraph::load(c.memory_out);
    CHECK(memory.size() > 0);

    ExperimentConfig again = small_run_config((dir.path / "second").string());
    again.memory_in = c.memory_out;
    CHECK(cmd_run(again).exit_code == 0);
}

TEST_CASE("cmd_ablate runs every variant and records the comparison table") {
    TempDir dir("ablate");
    ExperimentConfig c = small_run_config(dir.str());
    c.variants = {AblationVariant::Full, AblationVariant::NoRisk};
    AblationArtifacts art = cmd_ablate(c);
    CHECK(art.exit_code == 0);
    REQUIRE(art.rows.size() == 2);
    CHECK(art.rows[0].variant == AblationVariant::Full);
    CHECK(art.rows[1].variant == AblationVariant::NoRisk);

    nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "ablation.json"));
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("variant") == "full");
    CHECK(fs::exists(dir.path / "ablation.txt"));

    c.variants = {AblationVariant::Full};
    CHECK(cmd_ablate(c).exit_code == 2);  // a one-row ablation compares nothing
}

TEST_CASE("cmd_sweep walks the threshold scales and emits a CSV") {
    TempDir dir("sweep");
    ExperimentConfig c = small_run_config(dir.str());
    c.scenario_paths = {"scenarios/putfridge.json"};
    c.repetitions = 1;
    c.seeds = {11};
    c.epsilon_scales = {0.5, 1.0, 2.0};
    SweepArtifacts art = cmd_sweep(c);
    CHECK(art.exit_code == 0);
    REQUIRE(art.rows.size() == 3);
    CHECK(art.rows[0].scale == doctest::Approx(0.5));
    CHECK(art.rows[2].scale == doctest::Approx(2.0));
    for (const auto& row : art.rows) CHECK(row.tsr == doctest::Approx(1.0));

    std::string csv = slurp(dir.path / "sweep.csv");
    CHECK(csv.rfind("scale,tsr,main_share_low\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    c.epsilon_scales = {1.0};
    CHECK(cmd_sweep(c).exit_code == 2);  // a sweep needs at least two points
}

TEST_CASE("cmd_validate reports well-formed and broken scenarios") {
    std::ostringstream out;
    int rc = cmd_validate({"scenarios/putfridge.json"}, out);
    CHECK(rc == 0);
    CHECK(out.str().find("putfridge.json: ok") != std::string::npos);

    std::ostringstream bad;
    rc = cmd_validate({"scenarios/putfridge.json", "scenarios/missing.json"}, bad);
    CHECK(rc == 2);
    CHECK(bad.str().find("missing.json") != std::string::npos);
}
