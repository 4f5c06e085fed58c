#include "iolab/export.hpp"
#include "iolab/harness.hpp"
#include "iolab/log_io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

namespace iolab {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

TEST(Config, MissingKeysTakeDefaults) {
    EXPECT_EQ(config_digest(parse_config(R"({"seed": 0})")), config_digest(ScenarioConfig{}));
}

TEST(Config, SeedIsRequired) {
    EXPECT_THROW(parse_config("{}"), ConfigError);
}

TEST(Config, UnknownKeyIsError) {
    EXPECT_THROW(parse_config(R"({"sbm": {"blocks": 4}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"colour": 1})"), ConfigError);
    EXPECT_THROW(parse_config("not json"), ConfigError);
}

TEST(Config, CanonicalRenderingRoundTrips) {
    for (const auto& name : bundled_scenario_names()) {
        const auto cfg = bundled_scenario(name);
        const auto back = parse_config(config_to_json(cfg));
        EXPECT_EQ(config_to_json(back), config_to_json(cfg)) << name;
        EXPECT_EQ(config_digest(back), config_digest(cfg)) << name;
    }
}

TEST(Config, DigestTracksSeed) {
    auto cfg = bundled_scenario("organic-baseline");
    const auto d0 = config_digest(cfg);
    cfg.seed = 1;
    EXPECT_NE(config_digest(cfg), d0);
}

TEST(Config, UnknownScenarioIsError) {
    EXPECT_THROW(bundled_scenario("no-such-scenario"), ConfigError);
}

TEST(Metrics, AccountCounts) {
    const auto m = score_accounts({1, 2, 3, 4}, {3, 4, 5});
    EXPECT_EQ(m.true_positives, 2u);
    EXPECT_EQ(m.false_positives, 2u);
    EXPECT_EQ(m.false_negatives, 1u);
    EXPECT_DOUBLE_EQ(*m.precision, 0.5);
    EXPECT_DOUBLE_EQ(*m.recall, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*m.f1, 2.0 * 0.5 * (2.0 / 3.0) / (0.5 + 2.0 / 3.0));
}

TEST(Metrics, UndefinedRatiosStayEmpty) {
    const auto none = score_accounts({}, {});
    EXPECT_FALSE(none.precision);
    EXPECT_FALSE(none.recall);
    const auto no_flags = score_accounts({}, {1});
    EXPECT_FALSE(no_flags.precision);
    EXPECT_DOUBLE_EQ(*no_flags.recall, 0.0);
}

TEST(Metrics, WindowHitsNeedHalfOverlap) {
    // First flag sits fully inside, second only a quarter inside, third outside.
    const auto m = score_windows({{100, 200}, {260, 460}, {900, 1000}}, {{0, 310}});
    EXPECT_EQ(m.flagged, 3u);
    EXPECT_EQ(m.hits, 1u);
    EXPECT_EQ(m.detected, 1u);
    EXPECT_EQ(m.false_positives, 2u);
    EXPECT_DOUBLE_EQ(*m.precision, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(*m.recall, 1.0);
}

TEST(Metrics, FlagsOutsideAccountRangeThrow) {
    FlagSummary s;
    s.accounts["pivot"] = {10};
    EXPECT_THROW(evaluate_detections(s, GroundTruth{}, 5), InvalidArgument);
}

// One full run shared by the tests below.
struct SharedRun {
    TempDir dir{"run"};
    ScenarioConfig cfg = bundled_scenario("fig1-right");
    RunResult result = run_scenario(cfg, dir.path());
};

const SharedRun& shared_run() {
    static SharedRun run;
    return run;
}

TEST(Run, WritesEveryArtifact) {
    const auto& r = shared_run();
    const RunPaths paths{r.dir.path()};
    for (const auto& p : {paths.config(), paths.events("simulated"), paths.truth("simulated"),
                          paths.events("injected"), paths.accounts("injected"), paths.truth("injected"),
                          paths.topic_model(), paths.report(), paths.metrics()}) {
        EXPECT_TRUE(fs::exists(p)) << p;
    }
    for (const char* f : {"interaction.graphml", "interaction.dot", "interaction.csv", "stack.graphml", "stack.dot",
                          "stack_clusters.csv"}) {
        EXPECT_TRUE(fs::exists(paths.exports() / f)) << f;
    }
    EXPECT_EQ(read_text_file(paths.report()), r.result.report);
    EXPECT_EQ(report_digest(r.result.report), config_digest(r.cfg));
}

TEST(Run, ReportSummaryMatchesFindings) {
    const auto& r = shared_run();
    const auto expect = summarize(r.cfg, r.result.findings);
    const auto got = summary_from_report(r.result.report);
    EXPECT_EQ(got.accounts, expect.accounts);
    EXPECT_EQ(got.windows, expect.windows);
    EXPECT_EQ(got.partition, expect.partition);
    EXPECT_EQ(got.stack_users, expect.stack_users);
}

TEST(Run, PersistedStagesReadBack) {
    const auto& r = shared_run();
    const auto s = read_scenario(RunPaths{r.dir.path()}, "injected");
    EXPECT_EQ(s.log, r.result.scenario.log);
    EXPECT_EQ(s.truth, r.result.scenario.truth);
}

TEST(Export, GraphSizesMatch) {
    const auto& r = shared_run();
    const auto& g = r.result.findings.graph;
    const auto graphml = interaction_graphml(g, &r.result.findings.partition, &r.result.scenario.truth);
    EXPECT_EQ(graphml.rfind("<?xml", 0), 0u);
    EXPECT_EQ(count_of(graphml, "<node "), g.nodes.size());
    EXPECT_EQ(count_of(graphml, "<edge "), g.edges.size());
    const auto dot = interaction_dot(g);
    EXPECT_EQ(count_of(dot, " -- "), g.edges.size());
    const auto csv = interaction_csv(g);
    EXPECT_EQ(count_of(csv, "\n"), g.edges.size() + 1);
    const auto& sg = r.result.findings.stack.graph;
    const auto stack = stack_graphml(sg);
    EXPECT_EQ(count_of(stack, "<node "), sg.users.size() + sg.clients.size());
    EXPECT_EQ(count_of(stack, "<edge "), sg.edges.size());
}

TEST(Export, FormatNames) {
    EXPECT_EQ(parse_graph_format("dot"), GraphFormat::dot);
    EXPECT_EQ(extension(GraphFormat::graphml), ".graphml");
    EXPECT_THROW(parse_graph_format("png"), InvalidArgument);
}

#ifdef IOLAB_CLI_PATH

int cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" IOLAB_CLI_PATH "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, UsageErrorsExitOne) {
    TempDir dir("cli-usage");
    EXPECT_EQ(cli(""), 1);
    EXPECT_EQ(cli("frobnicate"), 1);
    EXPECT_EQ(cli("run --scenario no-such-scenario"), 1);
    EXPECT_EQ(cli("run"), 1);
    EXPECT_EQ(cli("export --scenario organic-baseline --format png"), 1);
    write_text_file(dir.path() / "bad.json", R"({"colour": 1})");
    EXPECT_EQ(cli("simulate --config '" + (dir.path() / "bad.json").string() + "'"), 1);
    EXPECT_EQ(cli("run --config '" + (dir.path() / "missing.json").string() + "'"), 1);
    EXPECT_EQ(cli("run --config x.json --scenario organic-baseline"), 1);
}

TEST(Cli, MissingStageExitsTwo) {
    TempDir dir("cli-stage");
    const std::string out = " --out '" + dir.path().string() + "'";
    EXPECT_EQ(cli("detect --scenario organic-baseline" + out), 2);
    EXPECT_EQ(cli("evaluate --scenario organic-baseline" + out), 2);
}

TEST(Cli, StagewiseMatchesRun) {
    TempDir a("cli-stages"), b("cli-run");
    const std::string sa = " --scenario fig1-left --seed 1 --out '" + a.path().string() + "'";
    for (const char* cmd : {"simulate", "inject", "detect", "evaluate"}) {
        ASSERT_EQ(cli(std::string(cmd) + sa), 0) << cmd;
    }
    ASSERT_EQ(cli("run --scenario fig1-left --seed 1 --out '" + b.path().string() + "'"), 0);
    const RunPaths pa{a.path()}, pb{b.path()};
    EXPECT_EQ(read_text_file(pa.report()), read_text_file(pb.report()));
    EXPECT_EQ(read_text_file(pa.metrics()), read_text_file(pb.metrics()));
    EXPECT_EQ(read_text_file(pa.events("injected")), read_text_file(pb.events("injected")));

    // The config in the run directory is picked up when none is given.
    for (const char* format : {"graphml", "dot", "csv"}) {
        EXPECT_EQ(cli(std::string("export --format ") + format + " --out '" + a.path().string() + "'"), 0);
    }
    for (const char* f : {"interaction.graphml", "interaction.dot", "interaction.csv", "stack.graphml", "stack.dot",
                          "stack_clusters.csv"}) {
        EXPECT_EQ(read_text_file(pa.exports() / f), read_text_file(pb.exports() / f)) << f;
    }

    // Evaluating against a different seed is a configuration mismatch.
    EXPECT_EQ(cli("evaluate --scenario fig1-left --seed 2 --out '" + a.path().string() + "'"), 1);
}

TEST(Cli, OutputRootDefault) {
    TempDir root("cli-root");
    const std::string env = "IOLAB_OUTPUT_ROOT='" + root.path().string() + "'";
    ASSERT_EQ(cli("simulate --scenario organic-baseline --seed 3", env), 0);
    EXPECT_TRUE(fs::exists(RunPaths{root.path() / "organic-baseline-seed3"}.events("simulated")));
}

#endif

}  // namespace
}  // namespace iolab
