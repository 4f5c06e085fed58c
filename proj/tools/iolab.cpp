#include "iolab/export.hpp"
#include "iolab/harness.hpp"
#include "iolab/log_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace iolab;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kStage = 2;

struct Options {
    std::string config;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "graphml";
};

ScenarioConfig resolve_config(const Options& o, bool allow_run_dir) {
    if (!o.config.empty() && !o.scenario.empty()) throw ConfigError("give --config or --scenario, not both");
    ScenarioConfig cfg;
    if (!o.config.empty()) {
        cfg = load_config(o.config);
    } else if (!o.scenario.empty()) {
        cfg = bundled_scenario(o.scenario);
    } else if (allow_run_dir && !o.out.empty() && fs::exists(RunPaths{o.out}.config())) {
        cfg = load_config(RunPaths{o.out}.config());
    } else {
        throw ConfigError("no configuration: pass --config or --scenario");
    }
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

fs::path resolve_out(const Options& o, const ScenarioConfig& cfg) {
    if (!o.out.empty()) return o.out;
    const char* root = std::getenv("IOLAB_OUTPUT_ROOT");
    const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("iolab-out");
    return base / (cfg.name + "-seed" + std::to_string(cfg.seed));
}

// Latest stage present in a run directory.
std::string latest_stage(const RunPaths& paths) {
    if (fs::exists(paths.events("injected"))) return "injected";
    if (fs::exists(paths.events("simulated"))) return "simulated";
    throw StageError("load", "no simulated or injected log under " + paths.root.string());
}

int cmd_simulate(const Options& o) {
    const auto cfg = resolve_config(o, false);
    const RunPaths paths{resolve_out(o, cfg)};
    write_text_file(paths.config(), config_to_json(cfg));
    const auto sim = simulate(cfg);
    write_scenario(sim.scenario, paths, "simulated");
    std::cout << "simulated " << sim.scenario.log.events.size() << " events, " << sim.scenario.log.num_accounts()
              << " accounts -> " << paths.stage("simulated").string() << "\n";
    return kOk;
}

int cmd_inject(const Options& o) {
    const auto cfg = resolve_config(o, true);
    const RunPaths paths{resolve_out(o, cfg)};
    write_text_file(paths.config(), config_to_json(cfg));
    auto sim = simulate(cfg);
    if (fs::exists(paths.events("simulated"))) {
        sim.scenario = read_scenario(paths, "simulated");
        if (sim.scenario.log.num_accounts() != sim.social.labels.size()) {
            throw StageError("inject", "persisted simulation does not match the configuration");
        }
    }
    const auto s = inject_playbooks(cfg, sim);
    write_scenario(s, paths, "injected");
    std::cout << "injected " << s.truth.operators.size() << " operators, " << s.log.events.size()
              << " events -> " << paths.stage("injected").string() << "\n";
    return kOk;
}

int cmd_detect(const Options& o) {
    const auto cfg = resolve_config(o, true);
    const RunPaths paths{resolve_out(o, cfg)};
    const auto s = read_scenario(paths, latest_stage(paths));
    const auto f = detect(cfg, s.log);
    save_topic_model(f.topic_model, paths.topic_model());
    write_text_file(paths.report(), render_report(cfg, s, f, std::nullopt));
    std::cout << "detected: " << f.partition.num_communities() << " communities, " << f.brigading.size()
              << " brigading windows, " << f.flood.size() << " flood windows, " << f.pivot.size()
              << " pivots -> " << paths.report().string() << "\n";
    return kOk;
}

int cmd_evaluate(const Options& o) {
    const auto cfg = resolve_config(o, true);
    const RunPaths paths{resolve_out(o, cfg)};
    const auto report = read_text_file(paths.report());
    if (report_digest(report) != config_digest(cfg)) {
        std::cerr << "iolab: report config digest " << report_digest(report) << " does not match configuration "
                  << config_digest(cfg) << "\n";
        return kUsage;
    }
    const auto s = read_scenario(paths, latest_stage(paths));
    const auto ev = evaluate_detections(summary_from_report(report), s.truth, s.log.num_accounts());
    write_text_file(paths.report(), attach_evaluation(report, ev));
    write_text_file(paths.metrics(), render_metrics_csv(ev));
    std::cout << "evaluated -> " << paths.metrics().string() << "\n";
    return kOk;
}

int cmd_run(const Options& o) {
    const auto cfg = resolve_config(o, false);
    const auto out = resolve_out(o, cfg);
    const auto r = run_scenario(cfg, out);
    std::cout << cfg.name << " seed " << cfg.seed << ": " << r.scenario.log.events.size() << " events, "
              << r.scenario.truth.operators.size() << " operators -> " << out.string() << "\n";
    return kOk;
}

int cmd_export(const Options& o) {
    const auto cfg = resolve_config(o, true);
    const RunPaths paths{resolve_out(o, cfg)};
    const auto format = parse_graph_format(o.format);
    const auto s = read_scenario(paths, latest_stage(paths));

    const auto graph = build_interaction_graph(s.log);
    Partition partition;
    if (fs::exists(paths.report())) {
        const auto summary = summary_from_report(read_text_file(paths.report()));
        for (const auto& [a, l] : summary.partition) {
            partition.nodes.push_back(a);
            partition.labels.push_back(l);
        }
    }
    const auto stack = analyze_stack(s.log, cfg.catalog, cfg.detectors.stack, derive_seed(cfg.seed, "detect.stack"));
    const auto dir = paths.exports();
    switch (format) {
        case GraphFormat::graphml:
            write_text_file(dir / "interaction.graphml", interaction_graphml(graph, &partition, &s.truth));
            write_text_file(dir / "stack.graphml", stack_graphml(stack.graph, &stack, &cfg.catalog));
            break;
        case GraphFormat::dot:
            write_text_file(dir / "interaction.dot", interaction_dot(graph, &partition, &s.truth));
            write_text_file(dir / "stack.dot", stack_dot(stack.graph, &stack));
            break;
        case GraphFormat::csv:
            write_text_file(dir / "interaction.csv", interaction_csv(graph));
            write_text_file(dir / "stack_clusters.csv", stack_clusters_csv(stack));
            break;
    }
    std::cout << "exported " << o.format << " -> " << dir.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Influence-operation simulation and detection lab"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Scenario config file (JSON)");
        sub->add_option("--scenario", o.scenario, "Bundled scenario name")
            ->check(CLI::IsMember(bundled_scenario_names()));
        sub->add_option("--seed", o.seed, "Root seed, overrides the config");
        sub->add_option("--out", o.out, "Run directory (default: $IOLAB_OUTPUT_ROOT/<scenario>-seed<N>)");
    };

    std::map<std::string, int (*)(const Options&)> handlers{
        {"simulate", cmd_simulate}, {"inject", cmd_inject}, {"detect", cmd_detect},
        {"evaluate", cmd_evaluate}, {"run", cmd_run},       {"export", cmd_export}};
    std::map<std::string, const char*> help{
        {"simulate", "Generate the organic log"},
        {"inject", "Apply the configured playbooks and stack policy"},
        {"detect", "Run every detector on the latest log"},
        {"evaluate", "Score the findings against the ground truth"},
        {"run", "Simulate, inject, detect and evaluate in one go"},
        {"export", "Write graph exports for a run directory"}};
    for (const auto& [name, _] : handlers) {
        auto* sub = app.add_subcommand(name, help[name]);
        add_common(sub);
        if (name == "export") {
            sub->add_option("--format", o.format, "Output format")
                ->check(CLI::IsMember({"graphml", "dot", "csv"}));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return handlers.at(name)(o);
    } catch (const ConfigError& e) {
        std::cerr << "iolab: config error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "iolab: " << e.what() << "\n";
        return kUsage;
    } catch (const StageError& e) {
        std::cerr << "iolab: stage " << e.what() << "\n";
        return kStage;
    } catch (const std::exception& e) {
        std::cerr << "iolab: " << e.what() << "\n";
        return kStage;
    }
}
