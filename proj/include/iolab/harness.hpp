#pragma once

#include "iolab/config.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace iolab {

inline constexpr const char* kVersion = "0.1.0";

class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error(stage + ": " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct Scenario {
    EventLog log;
    GroundTruth truth;
};

struct Simulation {
    SocialGraph social;
    TopicMatrix topics;
    std::vector<ClientUsage> usage;
    Scenario scenario;
};

Simulation simulate(const ScenarioConfig& cfg);

// Runs every playbook in order, assigns clients to the injected events and
// applies the stack policy if one is configured.
Scenario inject_playbooks(const ScenarioConfig& cfg, const Simulation& sim);

struct Findings {
    InteractionGraph graph;
    Partition partition;
    std::vector<WindowFinding> brigading;
    std::vector<WindowFinding> flood;
    TopicModel topic_model;
    std::vector<NarrativeScore> narrative;
    std::size_t pivot_scanned = 0;
    std::size_t pivot_too_few = 0;
    std::vector<PivotScore> pivot;  // flagged only
    std::vector<AmplificationScore> amplification;
    StackAnalysis stack;
    std::optional<std::size_t> stack_flagged;  // index into stack.scored
};

Findings detect(const ScenarioConfig& cfg, const EventLog& log);

// What evaluation needs from the findings; recoverable from a report.
struct FlagSummary {
    std::map<std::string, std::set<AccountId>> accounts;  // per account-level detector
    std::map<std::string, std::vector<std::pair<Timestamp, Timestamp>>> windows;
    std::vector<std::pair<AccountId, CommunityId>> partition;
    std::vector<AccountId> stack_users;
};

FlagSummary summarize(const ScenarioConfig& cfg, const Findings& f);

struct AccountMetrics {
    std::size_t flagged = 0;
    std::size_t positives = 0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

struct WindowMetrics {
    std::size_t flagged = 0;
    std::size_t planted = 0;
    std::size_t hits = 0;      // flagged windows at least half inside a planted one
    std::size_t detected = 0;  // planted windows with a hit
    std::size_t false_positives = 0;
    std::optional<double> precision;
    std::optional<double> recall;
};

struct Evaluation {
    std::map<std::string, AccountMetrics> accounts;
    std::map<std::string, WindowMetrics> windows;
    std::optional<double> partition_ari;
    std::optional<double> stack_ari;
};

AccountMetrics score_accounts(const std::set<AccountId>& flagged, const std::set<AccountId>& truth);
WindowMetrics score_windows(const std::vector<std::pair<Timestamp, Timestamp>>& flagged,
                            const std::vector<std::pair<Timestamp, Timestamp>>& planted);

// Throws InvalidArgument if flags name accounts outside [0, num_accounts).
Evaluation evaluate_detections(const FlagSummary& flags, const GroundTruth& truth, std::size_t num_accounts);

// Operators each account-level detector is meant to find.
std::set<AccountId> relevant_operators(const std::string& detector, const GroundTruth& truth);

std::string render_report(const ScenarioConfig& cfg, const Scenario& scenario, const Findings& f,
                          const std::optional<Evaluation>& eval);
// Re-renders a report with a new evaluation block.
std::string attach_evaluation(const std::string& report, const Evaluation& eval);
FlagSummary summary_from_report(const std::string& report);
std::string report_digest(const std::string& report);
std::string render_metrics_csv(const Evaluation& eval);

// Standard layout of a run directory.
struct RunPaths {
    std::filesystem::path root;

    std::filesystem::path config() const { return root / "config.json"; }
    std::filesystem::path stage(const std::string& name) const { return root / name; }
    std::filesystem::path events(const std::string& stage_name) const { return stage(stage_name) / "events.jsonl"; }
    std::filesystem::path accounts(const std::string& stage_name) const { return stage(stage_name) / "accounts.jsonl"; }
    std::filesystem::path truth(const std::string& stage_name) const { return stage(stage_name) / "truth.json"; }
    std::filesystem::path topic_model() const { return root / "topic_model.txt"; }
    std::filesystem::path report() const { return root / "report.json"; }
    std::filesystem::path metrics() const { return root / "metrics.csv"; }
    std::filesystem::path exports() const { return root / "exports"; }
};

void write_scenario(const Scenario& s, const RunPaths& paths, const std::string& stage_name);
Scenario read_scenario(const RunPaths& paths, const std::string& stage_name);

// Writes GraphML and DOT of the interaction graph, GraphML of the stack
// graph and the cluster mapping.
void write_exports(const ScenarioConfig& cfg, const Scenario& s, const Findings& f, const RunPaths& paths);

struct RunResult {
    Scenario scenario;
    Findings findings;
    Evaluation evaluation;
    std::string report;
};

// Full pipeline; every intermediate artifact lands under out_dir when given.
RunResult run_scenario(const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& out_dir);

}  // namespace iolab
